#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "relo/rng.hpp"

namespace relo {

// Complete binary tree over non-negative per-slot priorities. Leaves are
// padded to a power of two; padding leaves stay at zero. Internal nodes hold
// the sum of their children, so proportional sampling and updates are
// O(log capacity).
class SumTree {
 public:
  // Full rebuild cadence, in set_priority calls, bounding round-off drift.
  static constexpr std::uint64_t kRebuildInterval = 100000;

  explicit SumTree(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  double total() const { return nodes_[0]; }
  double get(std::size_t slot) const;

  // Throws InvalidPriority for negative or non-finite p, std::out_of_range
  // for slot >= capacity.
  void set_priority(std::size_t slot, double p);

  // Slot whose cumulative interval [c_{i-1}, c_i) contains u. Descends left
  // when u < left sum and never enters a zero-mass subtree.
  // Throws CannotSample when total() == 0, std::out_of_range for u outside
  // [0, total()).
  std::size_t sample_prefix(double u) const;

  // Splits [0, total()) into `batch` equal segments and draws one prefix
  // uniformly inside each.
  std::vector<std::size_t> stratified_sample(std::size_t batch, Rng& rng) const;

  // Largest change any internal node would see from a full rebuild.
  double audit() const;
  void rebuild();

 private:
  std::size_t leaf_index(std::size_t slot) const { return leaves_ - 1 + slot; }

  std::size_t capacity_;
  std::size_t leaves_;
  std::vector<double> nodes_;
  std::uint64_t updates_since_rebuild_ = 0;
};

}  // namespace relo
