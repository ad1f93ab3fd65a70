#include "relo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "relo/errors.hpp"

namespace relo::metrics {

void ScoreMatrix::validate() const {
  if (scores.empty() || scores.front().empty()) throw InvalidInput("ScoreMatrix: empty");
  for (const auto& row : scores) {
    if (row.size() != scores.front().size()) throw InvalidInput("ScoreMatrix: ragged rows");
  }
}

std::vector<double> ScoreMatrix::flatten() const {
  std::vector<double> out;
  for (const auto& row : scores) out.insert(out.end(), row.begin(), row.end());
  return out;
}

double normalized_score(double score, double low, double high) {
  if (high == low) throw InvalidInput("normalized_score: degenerate normalization (high == low)");
  return (score - low) / (high - low);
}

double mean(std::span<const double> samples) {
  if (samples.empty()) throw InvalidInput("mean: no samples");
  return std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
}

double median(std::span<const double> samples) {
  if (samples.empty()) throw InvalidInput("median: no samples");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  return n % 2 == 1 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

double iqm(std::span<const double> samples) {
  if (samples.size() < 4) throw InvalidInput("iqm: at least 4 samples required");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const std::size_t cut = s.size() / 4;
  return mean(std::span<const double>(s).subspan(cut, s.size() - 2 * cut));
}

double optimality_gap(std::span<const double> normalized, double optimal) {
  if (normalized.empty()) throw InvalidInput("optimality_gap: no samples");
  double sum = 0.0;
  for (double x : normalized) sum += std::max(0.0, optimal - x);
  return sum / static_cast<double>(normalized.size());
}

double optimality_gap(const ScoreMatrix& normalized, double optimal) {
  normalized.validate();
  const std::vector<double> flat = normalized.flatten();
  return optimality_gap(std::span<const double>(flat), optimal);
}

double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InvalidInput("quantile: no samples");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Interval bootstrap_ci(std::span<const double> samples, const Statistic& statistic, Rng& rng,
                      std::size_t resamples, double level) {
  if (samples.size() < 2) throw InvalidInput("bootstrap_ci: at least 2 samples required");
  if (resamples == 0 || !(level > 0.0 && level < 1.0)) {
    throw InvalidInput("bootstrap_ci: bad resample count or level");
  }
  const std::size_t n = samples.size();
  std::vector<double> draw(n);
  std::vector<double> stats(resamples);
  for (std::size_t b = 0; b < resamples; ++b) {
    for (std::size_t i = 0; i < n; ++i) draw[i] = samples[uniform_index(rng, n)];
    stats[b] = statistic(draw);
  }
  std::sort(stats.begin(), stats.end());
  const double tail = (1.0 - level) / 2.0;
  return {sorted_quantile(stats, tail), sorted_quantile(stats, 1.0 - tail)};
}

}  // namespace relo::metrics
