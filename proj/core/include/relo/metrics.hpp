#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "relo/rng.hpp"

namespace relo::metrics {

// scores[env][seed]. Rows must all have the same length.
struct ScoreMatrix {
  std::vector<std::vector<double>> scores;

  // Throws InvalidInput when ragged or empty.
  void validate() const;
  std::vector<double> flatten() const;
};

// (score - low) / (high - low). Throws InvalidInput when high == low.
double normalized_score(double score, double low, double high);

double mean(std::span<const double> samples);
double median(std::span<const double> samples);

// Interquartile mean: sort, drop floor(n/4) samples from each end, average
// the rest. Needs at least 4 samples.
double iqm(std::span<const double> samples);

// Mean over all entries of max(0, optimal - score).
double optimality_gap(std::span<const double> normalized, double optimal = 1.0);
double optimality_gap(const ScoreMatrix& normalized, double optimal = 1.0);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

using Statistic = std::function<double(std::span<const double>)>;

// Percentile bootstrap: resample with replacement, evaluate `statistic` on
// each resample and take the (1-level)/2 and (1+level)/2 quantiles.
Interval bootstrap_ci(std::span<const double> samples, const Statistic& statistic, Rng& rng,
                      std::size_t resamples = 2000, double level = 0.95);

// Linear-interpolated quantile of already sorted data, q in [0, 1].
double sorted_quantile(std::span<const double> sorted, double q);

}  // namespace relo::metrics
