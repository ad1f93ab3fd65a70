#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "relo/agent.hpp"
#include "relo/errors.hpp"
#include "relo/replay.hpp"
#include "relo/rng.hpp"

using namespace relo;
using namespace relo::agent;
using relo::testing::linear_net;
using relo::testing::naive_forward;

namespace {

LearnerState learner_from(nn::DenseNet online, nn::DenseNet target) {
  LearnerState s;
  s.online = std::move(online);
  s.target = std::move(target);
  s.optimizer = nn::AdamState::for_net(s.online);
  return s;
}

ReplayConfig flat_replay(std::size_t capacity) {
  ReplayConfig c;
  c.capacity = capacity;
  c.alpha = 0.6;
  c.beta = {1.0, 1.0, 1};
  return c;
}

// Two one-hot states, two actions. Row s of the weight matrix holds Q(s, .).
nn::DenseNet table_net(double q00, double q01, double q10, double q11) {
  return linear_net(2, 2, {q00, q01, q10, q11}, {0.0, 0.0});
}

std::vector<const Transition*> pointers(const std::vector<Transition>& ts) {
  std::vector<const Transition*> out;
  for (const Transition& t : ts) out.push_back(&t);
  return out;
}

AgentConfig small_config() {
  AgentConfig c;
  c.hidden = {8, 8};
  c.batch_size = 8;
  c.train_start = 1;
  return c;
}

void fill_random(PrioritizedBuffer& buf, std::size_t n, std::size_t obs_dim, int actions, Rng& rng) {
  for (std::size_t i = 0; i < n; ++i) {
    Transition t;
    t.state.assign(obs_dim, 0.0);
    t.next_state.assign(obs_dim, 0.0);
    t.state[uniform_index(rng, obs_dim)] = 1.0;
    t.next_state[uniform_index(rng, obs_dim)] = 1.0;
    t.action = static_cast<int>(uniform_index(rng, actions));
    t.reward = uniform01(rng) - 0.5;
    t.done = uniform01(rng) < 0.2;
    buf.push(t);
  }
}

}  // namespace

TEST(BellmanTargets, TerminalUsesRewardOnly) {
  const LearnerState s = learner_from(table_net(5, 5, 5, 5), table_net(7, 9, 7, 9));
  const std::vector<Transition> ts = {{{1, 0}, 0, 1.0, {0, 1}, true, Tag::clean}};
  AgentConfig c;
  EXPECT_EQ(bellman_targets(s, pointers(ts), c)[0], 1.0);
}

TEST(BellmanTargets, ZeroDiscountIsMyopic) {
  const LearnerState s = learner_from(table_net(5, 5, 5, 5), table_net(7, 9, 7, 9));
  const std::vector<Transition> ts = {{{1, 0}, 0, 0.25, {0, 1}, false, Tag::clean},
                                      {{0, 1}, 1, -2.0, {1, 0}, false, Tag::clean}};
  AgentConfig c;
  c.gamma = 0.0;
  const auto y = bellman_targets(s, pointers(ts), c);
  EXPECT_EQ(y[0], 0.25);
  EXPECT_EQ(y[1], -2.0);
}

TEST(BellmanTargets, TwoStateHandComputed) {
  // Target: Q(s1, .) = (3, -1). Online prefers action 1 in s1.
  const LearnerState s = learner_from(table_net(0, 0, 0, 4), table_net(0.5, 2.0, 3.0, -1.0));
  const std::vector<Transition> ts = {{{1, 0}, 0, 0.5, {0, 1}, false, Tag::clean}};
  AgentConfig c;
  c.gamma = 0.9;
  EXPECT_DOUBLE_EQ(bellman_targets(s, pointers(ts), c)[0], 0.5 + 0.9 * 3.0);
  c.double_dqn = true;
  EXPECT_DOUBLE_EQ(bellman_targets(s, pointers(ts), c)[0], 0.5 + 0.9 * -1.0);
}

TEST(BellmanTargets, EmptyBatchRejected) {
  const LearnerState s = learner_from(table_net(0, 0, 0, 0), table_net(0, 0, 0, 0));
  EXPECT_THROW(bellman_targets(s, {}, AgentConfig{}), InvalidInput);
}

TEST(PerSampleLosses, ScalarNetsGiveFourAndOne) {
  const LearnerState s =
      learner_from(linear_net(1, 1, {0.0}, {2.0}), linear_net(1, 1, {0.0}, {1.0}));
  const std::vector<Transition> ts = {{{1.0}, 0, 0.0, {1.0}, true, Tag::clean}};
  const auto pairs = per_sample_losses(s, pointers(ts), AgentConfig{});
  EXPECT_EQ(pairs[0].online_loss, 4.0);
  EXPECT_EQ(pairs[0].target_loss, 1.0);
  EXPECT_EQ(relo::relo(pairs[0]), 3.0);
}

TEST(PerSampleLosses, MatchesIndependentRecomputation) {
  Rng rng(12);
  AgentConfig c = small_config();
  LearnerState s = make_learner(5, 3, c, rng);
  Rng other(13);
  s.target = nn::DenseNet::make(std::vector<std::size_t>{5, 8, 8, 3}, other);
  PrioritizedBuffer buf(flat_replay(64));
  fill_random(buf, 64, 5, 3, rng);
  std::vector<const Transition*> batch;
  for (std::size_t i = 0; i < 64; ++i) batch.push_back(&buf.transition(i));

  for (bool dd : {false, true}) {
    c.double_dqn = dd;
    const auto pairs = per_sample_losses(s, batch, c);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const Transition& t = *batch[i];
      auto backup = [&] {
        if (t.done) return t.reward;
        const auto qt = naive_forward(s.target, t.next_state);
        const auto sel = dd ? naive_forward(s.online, t.next_state) : qt;
        const std::size_t a = std::max_element(sel.begin(), sel.end()) - sel.begin();
        return t.reward + c.gamma * qt[a];
      };
      const double e_on = naive_forward(s.online, t.state)[t.action] - backup();
      const double e_tg = naive_forward(s.target, t.state)[t.action] - backup();
      EXPECT_NEAR(pairs[i].online_loss, e_on * e_on, 1e-12);
      EXPECT_NEAR(pairs[i].target_loss, e_tg * e_tg, 1e-12);
    }
  }
}

TEST(PerSampleLosses, IdenticalNetworksHaveZeroReducibleLoss) {
  Rng rng(3);
  const AgentConfig c = small_config();
  const LearnerState s = make_learner(4, 2, c, rng);
  PrioritizedBuffer buf(flat_replay(32));
  fill_random(buf, 32, 4, 2, rng);
  std::vector<const Transition*> batch;
  for (std::size_t i = 0; i < 32; ++i) batch.push_back(&buf.transition(i));
  const auto pairs = per_sample_losses(s, batch, c);
  for (double p : compute_raw_priorities(SchemeConfig::relo(Mapping::clip, 0.01), pairs)) {
    EXPECT_EQ(p, 0.01);
  }
}

TEST(TrainOnBatch, UniformGradientIsPlainMiniBatchGradient) {
  // Linear Q with one-hot inputs: dL/dW[i, a] = (2/n) sum (q - y) x_i.
  Rng rng(21);
  AgentConfig c = small_config();
  c.gamma = 0.9;
  const std::size_t dim = 4;
  const int actions = 2;
  LearnerState s = learner_from(linear_net(dim, actions, {0.1, -0.2, 0.3, 0.0, -0.1, 0.2, 0.05, 0.4},
                                           {0.0, 0.1}),
                                linear_net(dim, actions, {0.2, 0.1, -0.3, 0.1, 0.0, 0.2, 0.1, -0.1},
                                           {0.05, 0.0}));
  const LearnerState before = s;
  PrioritizedBuffer buf(flat_replay(16));
  fill_random(buf, 16, dim, actions, rng);
  Rng sample_rng(5);
  const StepReport r = train_on_batch(s, buf, c, SchemeConfig::uniform(), sample_rng);

  std::vector<double> gw(dim * actions, 0.0);
  std::vector<double> gb(actions, 0.0);
  const double n = static_cast<double>(r.slots.size());
  for (std::size_t slot : r.slots) {
    const Transition& t = buf.transition(slot);
    double y = t.reward;
    if (!t.done) {
      const auto qn = naive_forward(before.target, t.next_state);
      y += c.gamma * *std::max_element(qn.begin(), qn.end());
    }
    const double err = naive_forward(before.online, t.state)[t.action] - y;
    for (std::size_t i = 0; i < dim; ++i) gw[i * actions + t.action] += 2.0 * err * t.state[i] / n;
    gb[t.action] += 2.0 * err / n;
  }
  double sq = 0.0;
  for (double g : gw) sq += g * g;
  for (double g : gb) sq += g * g;
  EXPECT_NEAR(r.grad_norm, std::sqrt(sq), 1e-12);
}

TEST(TrainOnBatch, WritesAlphaPoweredPrioritiesForSampledSlots) {
  Rng rng(8);
  AgentConfig c = small_config();
  for (auto scheme : {SchemeConfig::per(), SchemeConfig::relo(), SchemeConfig::uniform()}) {
    LearnerState s = make_learner(6, 3, c, rng);
    Rng other(77);
    s.target = nn::DenseNet::make(std::vector<std::size_t>{6, 8, 8, 3}, other);
    PrioritizedBuffer buf(flat_replay(40));
    fill_random(buf, 40, 6, 3, rng);
    const StepReport r = train_on_batch(s, buf, c, scheme, rng);
    ASSERT_EQ(r.slots.size(), c.batch_size);
    for (std::size_t i = 0; i < r.slots.size(); ++i) {
      EXPECT_GE(r.raw_priorities[i], scheme.epsilon);
      EXPECT_TRUE(std::isfinite(r.raw_priorities[i]));
      EXPECT_DOUBLE_EQ(buf.tree().get(r.slots[i]), std::pow(buf.raw_priority(r.slots[i]), 0.6));
      EXPECT_DOUBLE_EQ(buf.raw_priority(r.slots[i]), r.raw_priorities[i]);
    }
    EXPECT_EQ(s.grad_step, 1);
  }
}

TEST(TrainOnBatch, TargetNetworkUntouched) {
  Rng rng(9);
  const AgentConfig c = small_config();
  LearnerState s = make_learner(5, 2, c, rng);
  PrioritizedBuffer buf(flat_replay(50));
  fill_random(buf, 50, 5, 2, rng);
  const nn::DenseNet target_before = s.target;
  const nn::DenseNet online_before = s.online;
  for (int i = 0; i < 20; ++i) train_on_batch(s, buf, c, SchemeConfig::relo(), rng);
  EXPECT_TRUE(s.target == target_before);
  EXPECT_FALSE(s.online == online_before);
}

TEST(TrainOnBatch, HandSteppedTwoStepTrace) {
  // One terminal transition, batch of one, so every IS weight is 1 and the
  // loss is (W0 + b0 - r)^2 with input x = 1.
  LearnerState s = learner_from(linear_net(1, 2, {0.3, -0.2}, {0.1, 0.0}),
                                linear_net(1, 2, {0.3, -0.2}, {0.1, 0.0}));
  PrioritizedBuffer buf(flat_replay(4));
  buf.push({{1.0}, 0, 1.0, {1.0}, true, Tag::clean});
  AgentConfig c;
  c.batch_size = 1;
  c.train_start = 1;
  Rng rng(0);

  double w = 0.3, b = 0.1;
  double mw = 0, vw = 0, mb = 0, vb = 0;
  const double lr = 1e-3, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  for (int step = 1; step <= 2; ++step) {
    const double err = w + b - 1.0;
    const double expected_loss = err * err;
    const double g = 2.0 * err;
    auto adam = [&](double& p, double& m, double& v) {
      m = b1 * m + (1 - b1) * g;
      v = b2 * v + (1 - b2) * g * g;
      const double mh = m / (1 - std::pow(b1, step));
      const double vh = v / (1 - std::pow(b2, step));
      p -= lr * mh / (std::sqrt(vh) + eps);
    };
    adam(w, mw, vw);
    adam(b, mb, vb);

    const StepReport r = train_on_batch(s, buf, c, SchemeConfig::per(), rng);
    EXPECT_NEAR(r.mean_td_loss, expected_loss, 1e-12);
    EXPECT_NEAR(r.raw_priorities[0], expected_loss + 0.01, 1e-12);
    EXPECT_NEAR(s.online.layers()[0].weights[0], w, 1e-12);
    EXPECT_NEAR(s.online.layers()[0].bias[0], b, 1e-12);
    // Action 1 never sampled: its parameters do not move.
    EXPECT_EQ(s.online.layers()[0].weights[1], -0.2);
    EXPECT_EQ(s.online.layers()[0].bias[1], 0.0);
  }
}

TEST(TrainOnBatch, DivergenceRaises) {
  LearnerState s = learner_from(linear_net(1, 1, {0.0}, {0.0}), linear_net(1, 1, {0.0}, {0.0}));
  PrioritizedBuffer buf(flat_replay(4));
  buf.push({{1.0}, 0, 1e9, {1.0}, true, Tag::clean});
  AgentConfig c;
  c.batch_size = 1;
  Rng rng(0);
  EXPECT_THROW(train_on_batch(s, buf, c, SchemeConfig::per(), rng), TrainingDiverged);
}

TEST(TargetUpdate, HardEveryStepKeepsNetworksEqualAndReloAtFloor) {
  Rng rng(4);
  AgentConfig c = small_config();
  c.target_update = TargetUpdate::hard(1);
  LearnerState s = make_learner(4, 2, c, rng);
  PrioritizedBuffer buf(flat_replay(32));
  fill_random(buf, 32, 4, 2, rng);
  for (int i = 0; i < 10; ++i) {
    const StepReport r = train_on_batch(s, buf, c, SchemeConfig::relo(), rng);
    for (double p : r.raw_priorities) EXPECT_EQ(p, 0.01);
    maybe_update_target(s, c);
    EXPECT_TRUE(s.target == s.online);
  }
}

TEST(TargetUpdate, EmaWithUnitTauMatchesHardEveryStep) {
  Rng rng_a(6), rng_b(6);
  AgentConfig hard = small_config();
  hard.target_update = TargetUpdate::hard(1);
  AgentConfig ema = small_config();
  ema.target_update = TargetUpdate::ema(1.0);
  LearnerState a = make_learner(4, 2, hard, rng_a);
  LearnerState b = make_learner(4, 2, ema, rng_b);
  PrioritizedBuffer buf_a(flat_replay(32)), buf_b(flat_replay(32));
  fill_random(buf_a, 32, 4, 2, rng_a);
  fill_random(buf_b, 32, 4, 2, rng_b);
  for (int i = 0; i < 10; ++i) {
    train_on_batch(a, buf_a, hard, SchemeConfig::relo(), rng_a);
    train_on_batch(b, buf_b, ema, SchemeConfig::relo(), rng_b);
    maybe_update_target(a, hard);
    maybe_update_target(b, ema);
    EXPECT_TRUE(a.target == b.target);
    EXPECT_TRUE(a.online == b.online);
  }
}

TEST(TargetUpdate, HardPeriodHundredCopiesOnSchedule) {
  Rng rng(10);
  AgentConfig c = small_config();
  c.target_update = TargetUpdate::hard(100);
  LearnerState s = make_learner(4, 2, c, rng);
  PrioritizedBuffer buf(flat_replay(32));
  fill_random(buf, 32, 4, 2, rng);
  const nn::DenseNet initial = s.target;
  for (int i = 1; i <= 100; ++i) {
    train_on_batch(s, buf, c, SchemeConfig::per(), rng);
    maybe_update_target(s, c);
    if (i < 100) {
      ASSERT_TRUE(s.target == initial) << "step " << i;
    }
  }
  EXPECT_TRUE(s.target == s.online);
  EXPECT_FALSE(s.target == initial);
}

TEST(TargetUpdate, EmaBlendsTowardOnline) {
  LearnerState s = learner_from(linear_net(1, 1, {1.0}, {0.0}), linear_net(1, 1, {0.0}, {0.0}));
  AgentConfig c;
  c.target_update = TargetUpdate::ema(0.25);
  maybe_update_target(s, c);
  EXPECT_DOUBLE_EQ(s.target.layers()[0].weights[0], 0.25);
  maybe_update_target(s, c);
  EXPECT_DOUBLE_EQ(s.target.layers()[0].weights[0], 0.4375);
}

TEST(Act, FullExplorationIsUniform) {
  const LearnerState s = learner_from(linear_net(1, 4, {0, 0, 0, 0}, {0, 9, 0, 0}),
                                      linear_net(1, 4, {0, 0, 0, 0}, {0, 0, 0, 0}));
  Rng rng(17);
  std::vector<int> counts(4, 0);
  const int n = 10000;
  const std::vector<double> obs = {1.0};
  for (int i = 0; i < n; ++i) ++counts[act_with_rate(s, obs, 1.0, rng)];
  for (int k : counts) EXPECT_NEAR(static_cast<double>(k) / n, 0.25, 0.02);
}

TEST(Act, GreedyPicksBestAndBreaksTiesLow) {
  const std::vector<double> obs = {1.0};
  Rng rng(1);
  const LearnerState favour = learner_from(linear_net(1, 3, {0, 0, 0}, {0.1, 0.9, 0.2}),
                                           linear_net(1, 3, {0, 0, 0}, {0, 0, 0}));
  for (int i = 0; i < 100; ++i) EXPECT_EQ(act_with_rate(favour, obs, 0.0, rng), 1u);
  const LearnerState tie = learner_from(linear_net(1, 3, {0, 0, 0}, {0.5, 0.5, 0.5}),
                                        linear_net(1, 3, {0, 0, 0}, {0, 0, 0}));
  EXPECT_EQ(act_with_rate(tie, obs, 0.0, rng), 0u);
  const std::vector<double> later_tie = {0.0, 2.0, 2.0};
  EXPECT_EQ(argmax(later_tie), 1u);
  const std::vector<double> wrong = {1.0, 2.0};
  EXPECT_THROW(act_with_rate(tie, wrong, 0.0, rng), InvalidInput);
}

TEST(ExploreSchedule, LinearThenFlat) {
  const ExploreSchedule e{1.0, 0.05, 1000};
  EXPECT_DOUBLE_EQ(e.at(0), 1.0);
  EXPECT_DOUBLE_EQ(e.at(500), 0.525);
  EXPECT_DOUBLE_EQ(e.at(1000), 0.05);
  EXPECT_DOUBLE_EQ(e.at(100000), 0.05);
}

TEST(AgentConfig, ValidationRejectsBadValues) {
  AgentConfig c;
  EXPECT_NO_THROW(c.validate());
  c.gamma = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = AgentConfig{};
  c.target_update = TargetUpdate::hard(0);
  EXPECT_THROW(c.validate(), ConfigError);
  c = AgentConfig{};
  c.target_update = TargetUpdate::ema(0.0);
  EXPECT_THROW(c.validate(), ConfigError);
  c = AgentConfig{};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}
