#include "relo/agent.hpp"

#include <algorithm>
#include <cmath>

#include "relo/errors.hpp"

namespace relo::agent {

double ExploreSchedule::at(std::int64_t step) const {
  if (horizon <= 0 || step >= horizon) return end;
  if (step <= 0) return start;
  return start + (end - start) * static_cast<double>(step) / static_cast<double>(horizon);
}

void AgentConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (target_update.mode == TargetUpdate::Mode::hard && target_update.period < 1) {
    throw ConfigError("target period must be >= 1");
  }
  if (target_update.mode == TargetUpdate::Mode::ema &&
      !(target_update.tau > 0.0 && target_update.tau <= 1.0)) {
    throw ConfigError("tau must lie in (0, 1]");
  }
  if (batch_size == 0 || train_start == 0 || grad_steps_per_env_step == 0) {
    throw ConfigError("batch_size, train_start and grad_steps must be positive");
  }
  if (!(explore.start >= 0.0 && explore.start <= 1.0 && explore.end >= 0.0 && explore.end <= 1.0)) {
    throw ConfigError("exploration rates must lie in [0, 1]");
  }
  if (!(optimizer.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  for (std::size_t h : hidden) {
    if (h == 0) throw ConfigError("hidden layer sizes must be positive");
  }
}

LearnerState make_learner(std::size_t obs_dim, std::size_t action_count, const AgentConfig& config,
                          Rng& init_rng) {
  std::vector<std::size_t> sizes;
  sizes.push_back(obs_dim);
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(action_count);
  LearnerState s;
  s.online = nn::DenseNet::make(sizes, init_rng);
  s.target = s.online;
  s.optimizer = nn::AdamState::for_net(s.online, config.optimizer);
  return s;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t a = 1; a < values.size(); ++a) {
    if (values[a] > values[best]) best = a;
  }
  return best;
}

namespace {

double backup(const LearnerState& state, const Transition& t, const AgentConfig& config) {
  if (t.done) return t.reward;
  const std::vector<double> q_next = state.target.forward(t.next_state);
  const std::size_t a_star =
      config.double_dqn ? argmax(state.online.forward(t.next_state)) : argmax(q_next);
  return t.reward + config.gamma * q_next[a_star];
}

void check_action(const Transition& t, std::size_t action_count) {
  if (t.action < 0 || static_cast<std::size_t>(t.action) >= action_count) {
    throw InvalidInput("transition action out of range");
  }
}

}  // namespace

std::vector<double> bellman_targets(const LearnerState& state,
                                    std::span<const Transition* const> batch,
                                    const AgentConfig& config) {
  if (batch.empty()) throw InvalidInput("bellman_targets: empty batch");
  std::vector<double> y;
  y.reserve(batch.size());
  for (const Transition* t : batch) y.push_back(backup(state, *t, config));
  return y;
}

std::vector<LossPair> per_sample_losses(const LearnerState& state,
                                        std::span<const Transition* const> batch,
                                        const AgentConfig& config) {
  const std::vector<double> y = bellman_targets(state, batch, config);
  std::vector<LossPair> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = *batch[i];
    check_action(t, state.online.output_dim());
    const double q_online = state.online.forward(t.state)[t.action];
    const double q_target = state.target.forward(t.state)[t.action];
    out.push_back({(q_online - y[i]) * (q_online - y[i]), (q_target - y[i]) * (q_target - y[i])});
  }
  return out;
}

StepReport train_on_batch(LearnerState& state, PrioritizedBuffer& buffer,
                          const AgentConfig& config, const SchemeConfig& scheme, Rng& rng) {
  const SampledBatch batch = buffer.sample(config.batch_size, state.env_step, rng);
  const std::size_t n = batch.size();
  const std::vector<double> y = bellman_targets(state, batch.transitions, config);

  nn::GradientSet grads = nn::GradientSet::zeros_like(state.online);
  nn::ForwardCache cache;
  std::vector<double> output_grad(state.online.output_dim(), 0.0);
  std::vector<LossPair> losses(n);
  const bool need_target_loss = scheme.kind == SchemeKind::relo;

  StepReport report;
  double weighted_loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Transition& t = *batch.transitions[i];
    check_action(t, state.online.output_dim());
    state.online.forward(t.state, cache);
    const double err = cache.output()[t.action] - y[i];
    losses[i].online_loss = err * err;
    if (need_target_loss) {
      const double err_tgt = state.target.forward(t.state)[t.action] - y[i];
      losses[i].target_loss = err_tgt * err_tgt;
      report.mean_abs_relo += std::abs(relo(losses[i]));
    }
    weighted_loss += batch.is_weights[i] * losses[i].online_loss;
    report.mean_td_loss += losses[i].online_loss;

    // d/dq of (1/n) * w * (q - y)^2
    std::fill(output_grad.begin(), output_grad.end(), 0.0);
    output_grad[t.action] = 2.0 * batch.is_weights[i] * err / static_cast<double>(n);
    nn::accumulate_gradient(state.online, cache, output_grad, grads);
  }
  weighted_loss /= static_cast<double>(n);
  report.mean_td_loss /= static_cast<double>(n);
  report.mean_abs_relo /= static_cast<double>(n);

  if (!std::isfinite(weighted_loss) || !std::isfinite(report.mean_td_loss) ||
      report.mean_td_loss > config.divergence_threshold) {
    throw TrainingDiverged("train_on_batch: loss diverged (" + std::to_string(report.mean_td_loss) +
                           ")");
  }

  report.grad_norm = grads.norm();
  nn::adam_step(state.online, grads, state.optimizer);
  state.grad_step += 1;

  report.raw_priorities = compute_raw_priorities(scheme, losses);
  report.slots = batch.slots;
  buffer.update_priorities(report.slots, report.raw_priorities);
  return report;
}

void maybe_update_target(LearnerState& state, const AgentConfig& config) {
  const TargetUpdate& u = config.target_update;
  if (u.mode == TargetUpdate::Mode::hard) {
    if (state.grad_step % u.period == 0) state.target = state.online;
  } else {
    nn::polyak_copy(state.target, state.online, u.tau);
  }
}

std::size_t act_with_rate(const LearnerState& state, std::span<const double> obs, double rate,
                          Rng& rng) {
  if (obs.size() != state.online.input_dim()) throw InvalidInput("act: observation size mismatch");
  const std::size_t actions = state.online.output_dim();
  if (uniform01(rng) < rate) return uniform_index(rng, actions);
  return argmax(state.online.forward(obs));
}

std::size_t act(const LearnerState& state, std::span<const double> obs, std::int64_t step,
                const AgentConfig& config, Rng& rng) {
  return act_with_rate(state, obs, config.explore.at(step), rng);
}

}  // namespace relo::agent
