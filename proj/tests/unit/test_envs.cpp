#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "relo/envs.hpp"
#include "relo/errors.hpp"
#include "relo/rng.hpp"

using namespace relo;
using namespace relo::envs;

namespace {

std::size_t hot_index(const std::vector<double>& obs) {
  std::size_t count = 0, idx = 0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (obs[i] == 1.0) {
      ++count;
      idx = i;
    } else {
      EXPECT_EQ(obs[i], 0.0);
    }
  }
  EXPECT_EQ(count, 1u);
  return idx;
}

// Infinite-horizon value iteration with the slip model written out by hand.
double value_iteration(std::size_t w, std::size_t h, double slip, double goal_reward,
                       double penalty) {
  const std::size_t n = w * h;
  const std::size_t goal = n - 1;
  auto next = [&](std::size_t cell, int a) {
    std::size_t x = cell % w, y = cell / w;
    if (a == 0 && y > 0) --y;
    if (a == 1 && y + 1 < h) ++y;
    if (a == 2 && x > 0) --x;
    if (a == 3 && x + 1 < w) ++x;
    return y * w + x;
  };
  std::vector<double> v(n, 0.0);
  for (int iter = 0; iter < 100000; ++iter) {
    std::vector<double> nv(n, 0.0);
    double delta = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (c == goal) continue;
      double best = -1e300;
      for (int a = 0; a < 4; ++a) {
        double q = 0.0;
        for (int b = 0; b < 4; ++b) {
          const double p = (b == a ? 1.0 - slip : 0.0) + slip / 4.0;
          const std::size_t to = next(c, b);
          q += p * ((to == goal ? goal_reward : 0.0) - penalty + (to == goal ? 0.0 : v[to]));
        }
        best = std::max(best, q);
      }
      nv[c] = best;
      delta = std::max(delta, std::abs(nv[c] - v[c]));
    }
    v = nv;
    if (delta < 1e-13) break;
  }
  return v[0];
}

}  // namespace

TEST(NoisyChain, ResetIsOneHotAtStart) {
  NoisyChain env;
  Rng rng(1);
  const auto obs = env.reset(rng);
  ASSERT_EQ(obs.size(), 12u);
  EXPECT_EQ(hot_index(obs), 0u);
  Rng a(5), b(5);
  EXPECT_EQ(env.reset(a), env.reset(b));
}

TEST(NoisyChain, DefaultNoisySetIsMiddleThird) {
  NoisyChain env;
  for (std::size_t s = 0; s < 12; ++s) EXPECT_EQ(env.is_noisy(s), s >= 4 && s < 8) << s;
  EXPECT_EQ(env.optimal_return(), 1.0);
}

TEST(NoisyChain, DeterministicOptimumWithoutNoise) {
  NoisyChain env({12, 0.0, {}, 0});
  Rng rng(2);
  env.reset(rng);
  double ret = 0.0;
  int steps = 0;
  EnvStep s;
  do {
    s = env.step(NoisyChain::kRight, rng);
    ret += s.reward;
    ++steps;
  } while (!s.episode_over());
  EXPECT_EQ(ret, 1.0);
  EXPECT_EQ(steps, 11);
  EXPECT_TRUE(s.done);
  EXPECT_FALSE(s.truncated);
  EXPECT_THROW(env.step(NoisyChain::kRight, rng), ProtocolError);
}

TEST(NoisyChain, LeftClampsAndDynamicsIgnoreRng) {
  NoisyChain env;
  Rng rng(3);
  env.reset(rng);
  EXPECT_EQ(hot_index(env.step(NoisyChain::kLeft, rng).next_obs), 0u);
  for (int trial = 0; trial < 50; ++trial) {
    NoisyChain e;
    Rng r(static_cast<std::uint64_t>(trial));
    e.reset(r);
    for (int k = 0; k < 6; ++k) e.step(NoisyChain::kRight, r);
    EXPECT_EQ(hot_index(e.step(NoisyChain::kLeft, r).next_obs), 5u);
  }
}

TEST(NoisyChain, StepLimitTruncates) {
  NoisyChain env;
  Rng rng(4);
  env.reset(rng);
  EnvStep s;
  int steps = 0;
  do {
    s = env.step(NoisyChain::kLeft, rng);
    ++steps;
  } while (!s.episode_over());
  EXPECT_EQ(steps, 48);
  EXPECT_TRUE(s.truncated);
  EXPECT_FALSE(s.done);
}

TEST(NoisyChain, TagsFollowDepartedState) {
  NoisyChain env;
  Rng rng(5);
  env.reset(rng);
  for (std::size_t from = 0; from < 11; ++from) {
    const EnvStep s = env.step(NoisyChain::kRight, rng);
    EXPECT_EQ(s.tag, (from >= 4 && from < 8) ? Tag::noisy : Tag::clean) << from;
    if (s.tag == Tag::clean && from != 10) EXPECT_EQ(s.reward, 0.0);
  }
}

TEST(NoisyChain, NoiseMomentsAtNoisyState) {
  NoisyChain env;
  Rng rng(6);
  const int n = 10000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    env.reset(rng);
    for (int k = 0; k < 4; ++k) env.step(NoisyChain::kRight, rng);
    const EnvStep s = env.step(NoisyChain::kRight, rng);
    ASSERT_EQ(s.tag, Tag::noisy);
    sum += s.reward;
    sq += s.reward * s.reward;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(sd, 1.0, 0.05);
}

TEST(NoisyChain, AverageRewardConvergesToNoiselessValue) {
  NoisyChain noisy;
  NoisyChain clean({12, 0.0, {}, 0});
  Rng rng(7), rng_clean(7);
  const int n = 100000;
  double noisy_sum = 0.0, clean_sum = 0.0;
  noisy.reset(rng);
  clean.reset(rng_clean);
  for (int i = 0; i < n; ++i) {
    const EnvStep a = noisy.step(NoisyChain::kRight, rng);
    const EnvStep b = clean.step(NoisyChain::kRight, rng_clean);
    noisy_sum += a.reward;
    clean_sum += b.reward;
    if (a.episode_over()) noisy.reset(rng);
    if (b.episode_over()) clean.reset(rng_clean);
  }
  EXPECT_NEAR(noisy_sum / n, clean_sum / n, 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST(WindyGrid, ResetShapeAndStart) {
  WindyGrid env;
  Rng rng(1);
  const auto obs = env.reset(rng);
  ASSERT_EQ(obs.size(), 49u);
  EXPECT_EQ(hot_index(obs), 0u);
}

TEST(WindyGrid, NoSlipShortestPathReturn) {
  WindyGrid env({7, 7, 0.0, 1.0, 0.01, 100});
  EXPECT_NEAR(env.optimal_return(), 0.88, 1e-12);
  Rng rng(2);
  env.reset(rng);
  double ret = 0.0;
  EnvStep s;
  for (int i = 0; i < 6; ++i) ret += env.step(WindyGrid::kRight, rng).reward;
  for (int i = 0; i < 6; ++i) {
    s = env.step(WindyGrid::kDown, rng);
    ret += s.reward;
  }
  EXPECT_TRUE(s.done);
  EXPECT_NEAR(ret, 0.88, 1e-12);
  EXPECT_THROW(env.step(WindyGrid::kDown, rng), ProtocolError);
}

TEST(WindyGrid, OptimalReturnMatchesValueIteration) {
  for (double slip : {0.0, 0.1, 0.3}) {
    WindyGrid env({7, 7, slip, 1.0, 0.01, 100});
    EXPECT_NEAR(env.optimal_return(), value_iteration(7, 7, slip, 1.0, 0.01), 1e-6) << slip;
  }
  WindyGrid rect({5, 3, 0.1, 1.0, 0.01, 100});
  EXPECT_NEAR(rect.optimal_return(), value_iteration(5, 3, 0.1, 1.0, 0.01), 1e-6);
}

TEST(WindyGrid, WallsBlock) {
  WindyGrid env;
  EXPECT_EQ(env.move(0, WindyGrid::kUp), 0u);
  EXPECT_EQ(env.move(0, WindyGrid::kLeft), 0u);
  EXPECT_EQ(env.move(0, WindyGrid::kRight), 1u);
  EXPECT_EQ(env.move(0, WindyGrid::kDown), 7u);
  EXPECT_EQ(env.move(48, WindyGrid::kDown), 48u);
}

TEST(WindyGrid, SlipRateAndTags) {
  WindyGrid env;
  Rng rng(9);
  int noisy = 0, total = 0;
  env.reset(rng);
  for (int i = 0; i < 40000; ++i) {
    // Bounce between the top-left cell and its right neighbour region.
    const EnvStep s = env.step(WindyGrid::kLeft, rng);
    EXPECT_TRUE(s.tag == Tag::noisy || s.tag == Tag::clean);
    noisy += s.tag == Tag::noisy;
    ++total;
    if (s.episode_over()) env.reset(rng);
  }
  // A substituted action differs from the intended one 3/4 of the time.
  EXPECT_NEAR(static_cast<double>(noisy) / total, 0.1 * 0.75, 0.01);
}

TEST(WindyGrid, MonteCarloGreedyPolicyNearOptimal) {
  // A staircase that never walks away from the goal is optimal under slip.
  WindyGrid env;
  Rng rng(10);
  const int episodes = 20000;
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    env.reset(rng);
    std::size_t cell = 0;
    EnvStep s;
    do {
      const std::size_t x = cell % 7;
      const std::size_t y = cell / 7;
      const std::size_t a = (x < 6 && (y == 0 || x < y)) ? WindyGrid::kRight : WindyGrid::kDown;
      s = env.step(a, rng);
      cell = hot_index(s.next_obs);
      total += s.reward;
    } while (!s.episode_over());
  }
  EXPECT_NEAR(total / episodes, env.optimal_return(), 0.005);
}

TEST(Factory, BuildsEachKindAndCloneIsIndependent) {
  EnvConfig c;
  c.kind = parse_env_kind("windy_grid");
  auto grid = make_environment(c);
  EXPECT_EQ(grid->name(), "windy_grid");
  c.kind = parse_env_kind("noisy_chain");
  c.chain.length = 6;
  auto chain = make_environment(c);
  EXPECT_EQ(chain->observation_dim(), 6u);
  EXPECT_THROW(parse_env_kind("cartpole"), ConfigError);

  Rng rng(1);
  chain->reset(rng);
  chain->step(NoisyChain::kRight, rng);
  auto copy = chain->clone();
  copy->reset(rng);
  EXPECT_EQ(hot_index(chain->step(NoisyChain::kRight, rng).next_obs), 2u);
  EXPECT_EQ(hot_index(copy->step(NoisyChain::kRight, rng).next_obs), 1u);
}

TEST(NoisyChain, InvalidConfigRejected) {
  EXPECT_THROW(NoisyChain({1, 1.0, {}, 0}), ConfigError);
  EXPECT_THROW(NoisyChain({12, -1.0, {}, 0}), ConfigError);
  EXPECT_THROW(NoisyChain({12, 1.0, {20}, 0}), ConfigError);
}
