#include "relo/replay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "relo/errors.hpp"

namespace relo {

double BetaSchedule::at(std::int64_t step) const {
  if (horizon <= 0 || step >= horizon) return end;
  if (step <= 0) return start;
  const double frac = static_cast<double>(step) / static_cast<double>(horizon);
  return start + (end - start) * frac;
}

double importance_weight(std::size_t n, double probability, double beta) {
  return std::pow(1.0 / (static_cast<double>(n) * probability), beta);
}

PrioritizedBuffer::PrioritizedBuffer(ReplayConfig config)
    : config_(config), tree_(config.capacity) {
  if (!(config_.alpha >= 0.0 && config_.alpha < 1.0)) {
    throw InvalidInput("PrioritizedBuffer: alpha must lie in [0, 1)");
  }
  if (!(config_.epsilon > 0.0)) throw InvalidInput("PrioritizedBuffer: epsilon must be positive");
  storage_.resize(config_.capacity);
  raw_.assign(config_.capacity, 0.0);
}

void PrioritizedBuffer::write_leaf(std::size_t slot, double raw) {
  raw_[slot] = raw;
  tree_.set_priority(slot, std::pow(raw, config_.alpha));
}

std::size_t PrioritizedBuffer::push(Transition t) {
  const std::size_t slot = next_;
  storage_[slot] = std::move(t);
  write_leaf(slot, max_priority_);
  trace("push", slot, max_priority_);
  next_ = (next_ + 1) % config_.capacity;
  size_ = std::min(size_ + 1, config_.capacity);
  return slot;
}

SampledBatch PrioritizedBuffer::sample(std::size_t batch, std::int64_t step, Rng& rng) const {
  if (empty()) throw CannotSample("PrioritizedBuffer: buffer is empty");
  SampledBatch out;
  out.slots = tree_.stratified_sample(batch, rng);
  out.beta = config_.beta.at(step);
  const double total = tree_.total();
  out.transitions.reserve(batch);
  out.probabilities.reserve(batch);
  out.is_weights.reserve(batch);
  double max_w = 0.0;
  for (std::size_t slot : out.slots) {
    const double p = tree_.get(slot) / total;
    const double w = importance_weight(size_, p, out.beta);
    out.transitions.push_back(&storage_[slot]);
    out.probabilities.push_back(p);
    out.is_weights.push_back(w);
    max_w = std::max(max_w, w);
  }
  for (double& w : out.is_weights) w /= max_w;
  return out;
}

void PrioritizedBuffer::update_priorities(std::span<const std::size_t> slots,
                                          std::span<const double> raw) {
  if (slots.size() != raw.size()) {
    throw InvalidInput("update_priorities: slots and priorities differ in length");
  }
  for (std::size_t j = 0; j < slots.size(); ++j) {
    if (slots[j] >= size_) throw InvalidInput("update_priorities: slot not occupied");
    const double p = raw[j];
    if (!std::isfinite(p) || p < config_.epsilon) {
      throw InvalidPriority("update_priorities: raw priority " + std::to_string(p) +
                            " is non-finite or below the epsilon floor");
    }
  }
  for (std::size_t j = 0; j < slots.size(); ++j) {
    write_leaf(slots[j], raw[j]);
    max_priority_ = std::max(max_priority_, raw[j]);
    trace("update", slots[j], raw[j]);
  }
}

const Transition& PrioritizedBuffer::transition(std::size_t slot) const {
  if (slot >= size_) throw InvalidInput("transition: slot not occupied");
  return storage_[slot];
}

double PrioritizedBuffer::raw_priority(std::size_t slot) const {
  if (slot >= size_) throw InvalidInput("raw_priority: slot not occupied");
  return raw_[slot];
}

double PrioritizedBuffer::probability(std::size_t slot) const {
  if (slot >= size_) throw InvalidInput("probability: slot not occupied");
  return tree_.get(slot) / tree_.total();
}

double PrioritizedBuffer::mean_raw_priority(Tag tag) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t slot = 0; slot < size_; ++slot) {
    if (storage_[slot].tag != tag) continue;
    sum += raw_[slot];
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

void PrioritizedBuffer::trace(const char* op, std::size_t slot, double raw) const {
  if (trace_ == nullptr) return;
  char line[96];
  std::snprintf(line, sizeof line, "%lld,%s,%zu,%.17g\n", static_cast<long long>(trace_step_), op,
                slot, raw);
  *trace_ << line;
}

}  // namespace relo
