#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "relo/nn.hpp"
#include "relo/priority.hpp"
#include "relo/replay.hpp"
#include "relo/rng.hpp"
#include "relo/transition.hpp"

namespace relo::agent {

struct TargetUpdate {
  enum class Mode { hard, ema };
  Mode mode = Mode::hard;
  std::int64_t period = 5;    // hard: copy every `period` gradient steps
  double tau = 0.005;         // ema: blend factor per gradient step

  static TargetUpdate hard(std::int64_t period) { return {Mode::hard, period, 1.0}; }
  static TargetUpdate ema(double tau) { return {Mode::ema, 1, tau}; }
};

// Linear exploration-rate ramp, held at `end` after `horizon` steps.
struct ExploreSchedule {
  double start = 1.0;
  double end = 0.05;
  std::int64_t horizon = 10000;

  double at(std::int64_t step) const;
};

struct AgentConfig {
  double gamma = 0.9;
  TargetUpdate target_update;
  bool double_dqn = false;
  ExploreSchedule explore;
  std::size_t batch_size = 32;
  std::size_t train_start = 500;
  std::size_t grad_steps_per_env_step = 1;
  std::vector<std::size_t> hidden = {64, 64};
  nn::AdamConfig optimizer;
  // Mean batch loss above this aborts training.
  double divergence_threshold = 1e8;

  // Throws ConfigError.
  void validate() const;
};

struct LearnerState {
  nn::DenseNet online;
  nn::DenseNet target;
  nn::AdamState optimizer;
  std::int64_t env_step = 0;
  std::int64_t grad_step = 0;
};

// Fresh learner; the target starts as an exact copy of the online network.
LearnerState make_learner(std::size_t obs_dim, std::size_t action_count, const AgentConfig& config,
                          Rng& init_rng);

// y_i = r_i + gamma * (1 - done_i) * Q_target(s'_i, a*), with a* the target
// argmax, or the online argmax when double_dqn is set.
std::vector<double> bellman_targets(const LearnerState& state,
                                    std::span<const Transition* const> batch,
                                    const AgentConfig& config);

// Squared errors of online and target Q(s_i, a_i) against one shared backup.
std::vector<LossPair> per_sample_losses(const LearnerState& state,
                                        std::span<const Transition* const> batch,
                                        const AgentConfig& config);

struct StepReport {
  double mean_td_loss = 0.0;   // unweighted mean online loss over the batch
  double mean_abs_relo = 0.0;  // only populated under the relo scheme
  double grad_norm = 0.0;
  std::vector<std::size_t> slots;
  std::vector<double> raw_priorities;
};

// Samples a batch, takes one Adam step on the IS-weighted mean online loss
// (the target receives no gradient) and writes the scheme's priorities back
// using the pre-update losses. Throws TrainingDiverged.
StepReport train_on_batch(LearnerState& state, PrioritizedBuffer& buffer,
                          const AgentConfig& config, const SchemeConfig& scheme, Rng& rng);

// Hard: copy when grad_step is a multiple of the period. EMA: blend every
// call.
void maybe_update_target(LearnerState& state, const AgentConfig& config);

// Lowest index among the maximal entries.
std::size_t argmax(std::span<const double> values);

// Epsilon-greedy with the rate taken from the exploration schedule at `step`.
std::size_t act(const LearnerState& state, std::span<const double> obs, std::int64_t step,
                const AgentConfig& config, Rng& rng);

// Epsilon-greedy with an explicit exploration rate.
std::size_t act_with_rate(const LearnerState& state, std::span<const double> obs, double rate,
                          Rng& rng);

}  // namespace relo::agent
