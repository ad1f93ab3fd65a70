#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "relo/rng.hpp"
#include "relo/sumtree.hpp"
#include "relo/transition.hpp"

namespace relo {

// Linear ramp from `start` to `end` over `horizon` steps, held at `end`
// afterwards.
struct BetaSchedule {
  double start = 0.4;
  double end = 1.0;
  std::int64_t horizon = 30000;

  double at(std::int64_t step) const;
};

struct ReplayConfig {
  std::size_t capacity = 100000;
  double alpha = 0.6;
  BetaSchedule beta;
  // Priority floor. Raw priorities below it are rejected.
  double epsilon = 1e-2;
};

struct SampledBatch {
  std::vector<const Transition*> transitions;
  std::vector<std::size_t> slots;
  std::vector<double> probabilities;
  // (1 / (N * P_i))^beta divided by the batch maximum.
  std::vector<double> is_weights;
  double beta = 1.0;

  std::size_t size() const { return slots.size(); }
};

// Un-normalized importance weight (1 / (n * probability))^beta.
double importance_weight(std::size_t n, double probability, double beta);

// Ring buffer of transitions with proportional prioritized sampling.
// Leaves of the sum-tree hold raw^alpha; the buffer also keeps the raw
// priority of every slot for diagnostics. New transitions enter with the
// running maximum raw priority, which is never lowered on eviction.
class PrioritizedBuffer {
 public:
  explicit PrioritizedBuffer(ReplayConfig config);

  const ReplayConfig& config() const { return config_; }
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return config_.capacity; }
  bool empty() const { return size_ == 0; }
  double max_priority() const { return max_priority_; }

  std::size_t push(Transition t);

  // Throws CannotSample when empty.
  SampledBatch sample(std::size_t batch, std::int64_t step, Rng& rng) const;

  // Throws InvalidPriority for non-finite values or values below epsilon,
  // InvalidInput for mismatched lengths or unoccupied slots.
  void update_priorities(std::span<const std::size_t> slots, std::span<const double> raw);

  const Transition& transition(std::size_t slot) const;
  double raw_priority(std::size_t slot) const;
  double probability(std::size_t slot) const;
  const SumTree& tree() const { return tree_; }

  // Mean raw priority over occupied slots carrying `tag`; 0 when none do.
  double mean_raw_priority(Tag tag) const;

  // Line-delimited trace "step,op,slot,raw_priority" of every push and
  // priority update. The stream must outlive the buffer or be reset to
  // nullptr. The step stamped on records is set by set_trace_step.
  void set_trace(std::ostream* out) { trace_ = out; }
  void set_trace_step(std::int64_t step) { trace_step_ = step; }

 private:
  void write_leaf(std::size_t slot, double raw);
  void trace(const char* op, std::size_t slot, double raw) const;

  ReplayConfig config_;
  SumTree tree_;
  std::vector<Transition> storage_;
  std::vector<double> raw_;
  std::size_t next_ = 0;
  std::size_t size_ = 0;
  double max_priority_ = 1.0;
  std::ostream* trace_ = nullptr;
  std::int64_t trace_step_ = 0;
};

}  // namespace relo
