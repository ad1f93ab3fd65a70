#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "relo/rng.hpp"
#include "relo/transition.hpp"

namespace relo::envs {

struct EnvStep {
  std::vector<double> next_obs;
  double reward = 0.0;
  bool done = false;       // true terminal state
  bool truncated = false;  // step limit reached without terminating
  Tag tag = Tag::clean;

  bool episode_over() const { return done || truncated; }
};

// Episodic environment with one-hot observations and a discrete action set.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::vector<double> reset(Rng& rng) = 0;
  // Throws ProtocolError if the episode is over and reset was not called.
  virtual EnvStep step(std::size_t action, Rng& rng) = 0;

  virtual std::size_t observation_dim() const = 0;
  virtual std::size_t action_count() const = 0;
  // Exact optimal expected undiscounted episode return.
  virtual double optimal_return() const = 0;
  // Return of an episode that never reaches the goal; the low end used for
  // score normalization.
  virtual double failure_return() const = 0;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;
};

// Deterministic chain 0..N-1 with actions {left, right}. Reaching N-1 pays
// 1 and terminates. Leaving a state in the noisy set adds N(0, sigma^2) to
// the reward.
struct NoisyChainConfig {
  std::size_t length = 12;
  double noise_std = 1.0;
  // Empty selects the middle third, [N/3, 2N/3).
  std::vector<std::size_t> noisy_states;
  // 0 selects 4 * N.
  std::size_t step_limit = 0;
};

class NoisyChain final : public Environment {
 public:
  static constexpr std::size_t kLeft = 0;
  static constexpr std::size_t kRight = 1;

  explicit NoisyChain(NoisyChainConfig config = {});

  std::vector<double> reset(Rng& rng) override;
  EnvStep step(std::size_t action, Rng& rng) override;

  std::size_t observation_dim() const override { return config_.length; }
  std::size_t action_count() const override { return 2; }
  double optimal_return() const override { return 1.0; }
  double failure_return() const override { return 0.0; }
  std::string name() const override { return "noisy_chain"; }
  std::unique_ptr<Environment> clone() const override;

  const NoisyChainConfig& config() const { return config_; }
  bool is_noisy(std::size_t state) const { return noisy_[state]; }
  std::size_t position() const { return position_; }

 private:
  NoisyChainConfig config_;
  std::vector<bool> noisy_;
  std::size_t position_ = 0;
  std::size_t steps_ = 0;
  bool over_ = true;
};

// Grid with start in the top-left corner and goal in the opposite corner.
// Actions up/down/left/right; with probability `slip` the action is replaced
// by a uniformly random one. Each step costs `step_penalty`; reaching the
// goal adds `goal_reward` and terminates. Steps whose action was replaced by
// a different one are tagged noisy.
struct WindyGridConfig {
  std::size_t width = 7;
  std::size_t height = 7;
  double slip = 0.1;
  double goal_reward = 1.0;
  double step_penalty = 0.01;
  std::size_t step_limit = 100;
};

class WindyGrid final : public Environment {
 public:
  enum Action : std::size_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

  explicit WindyGrid(WindyGridConfig config = {});

  std::vector<double> reset(Rng& rng) override;
  EnvStep step(std::size_t action, Rng& rng) override;

  std::size_t observation_dim() const override { return config_.width * config_.height; }
  std::size_t action_count() const override { return 4; }
  double optimal_return() const override { return optimal_return_; }
  double failure_return() const override {
    return -config_.step_penalty * static_cast<double>(config_.step_limit);
  }
  std::string name() const override { return "windy_grid"; }
  std::unique_ptr<Environment> clone() const override;

  const WindyGridConfig& config() const { return config_; }
  std::size_t start_cell() const { return 0; }
  std::size_t goal_cell() const { return observation_dim() - 1; }
  // Cell reached from `cell` by moving in direction `action`; walls block.
  std::size_t move(std::size_t cell, std::size_t action) const;

 private:
  double solve_optimal_return() const;

  WindyGridConfig config_;
  double optimal_return_ = 0.0;
  std::size_t cell_ = 0;
  std::size_t steps_ = 0;
  bool over_ = true;
};

enum class EnvKind { noisy_chain, windy_grid };

struct EnvConfig {
  EnvKind kind = EnvKind::noisy_chain;
  NoisyChainConfig chain;
  WindyGridConfig grid;
};

std::unique_ptr<Environment> make_environment(const EnvConfig& config);
EnvKind parse_env_kind(const std::string& text);

std::vector<double> one_hot(std::size_t index, std::size_t size);

}  // namespace relo::envs
