#include "relo/sumtree.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "relo/errors.hpp"

namespace relo {

SumTree::SumTree(std::size_t capacity)
    : capacity_(capacity), leaves_(std::bit_ceil(std::max<std::size_t>(capacity, 1))) {
  if (capacity == 0) throw InvalidInput("SumTree: capacity must be positive");
  nodes_.assign(2 * leaves_ - 1, 0.0);
}

double SumTree::get(std::size_t slot) const {
  if (slot >= capacity_) throw std::out_of_range("SumTree::get: slot out of range");
  return nodes_[leaf_index(slot)];
}

void SumTree::set_priority(std::size_t slot, double p) {
  if (slot >= capacity_) throw std::out_of_range("SumTree::set_priority: slot out of range");
  if (!std::isfinite(p) || p < 0.0) {
    throw InvalidPriority("SumTree: priority must be finite and non-negative, got " +
                          std::to_string(p));
  }
  std::size_t node = leaf_index(slot);
  nodes_[node] = p;
  while (node != 0) {
    node = (node - 1) / 2;
    nodes_[node] = nodes_[2 * node + 1] + nodes_[2 * node + 2];
  }
  if (++updates_since_rebuild_ >= kRebuildInterval) rebuild();
}

std::size_t SumTree::sample_prefix(double u) const {
  const double mass = total();
  if (!(mass > 0.0)) throw CannotSample("SumTree: cannot sample with zero total priority");
  if (!(u >= 0.0 && u < mass)) throw std::out_of_range("SumTree::sample_prefix: u outside [0, total)");
  std::size_t node = 0;
  while (node < leaves_ - 1) {
    const std::size_t left = 2 * node + 1;
    const std::size_t right = left + 1;
    if (u < nodes_[left] || nodes_[right] <= 0.0) {
      node = left;
    } else {
      u -= nodes_[left];
      node = right;
    }
  }
  return node - (leaves_ - 1);
}

std::vector<std::size_t> SumTree::stratified_sample(std::size_t batch, Rng& rng) const {
  const double mass = total();
  if (!(mass > 0.0)) throw CannotSample("SumTree: cannot sample with zero total priority");
  if (batch == 0) throw InvalidInput("SumTree: batch must be positive");
  const double segment = mass / static_cast<double>(batch);
  const double upper = std::nextafter(mass, 0.0);
  std::vector<std::size_t> slots(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    const double u = (static_cast<double>(i) + uniform01(rng)) * segment;
    slots[i] = sample_prefix(std::min(u, upper));
  }
  return slots;
}

double SumTree::audit() const {
  std::vector<double> fresh = nodes_;
  double worst = 0.0;
  for (std::size_t node = leaves_ - 1; node-- > 0;) {
    fresh[node] = fresh[2 * node + 1] + fresh[2 * node + 2];
    worst = std::max(worst, std::abs(fresh[node] - nodes_[node]));
  }
  return worst;
}

void SumTree::rebuild() {
  for (std::size_t node = leaves_ - 1; node-- > 0;) {
    nodes_[node] = nodes_[2 * node + 1] + nodes_[2 * node + 2];
  }
  updates_since_rebuild_ = 0;
}

}  // namespace relo
