#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace relo {

enum class SchemeKind { uniform, per, relo };

// How a signed reducible loss becomes a non-negative priority.
enum class Mapping {
  clip,       // max(x, 0)
  explinear,  // e^x for x < 0, x + 1 otherwise
};

struct SchemeConfig {
  SchemeKind kind = SchemeKind::relo;
  // Set iff kind == relo.
  std::optional<Mapping> mapping = Mapping::clip;
  double epsilon = 1e-2;

  static SchemeConfig uniform(double eps = 1e-2) { return {SchemeKind::uniform, std::nullopt, eps}; }
  static SchemeConfig per(double eps = 1e-2) { return {SchemeKind::per, std::nullopt, eps}; }
  static SchemeConfig relo(Mapping m = Mapping::clip, double eps = 1e-2) {
    return {SchemeKind::relo, m, eps};
  }

  // Throws ConfigError when the mapping/kind pairing or epsilon is invalid.
  void validate() const;

  // "uniform", "per", "relo" (clip) or "relo-explinear".
  std::string name() const;
};

SchemeKind parse_scheme_kind(std::string_view text);
Mapping parse_mapping(std::string_view text);
std::string_view to_string(SchemeKind kind);
std::string_view to_string(Mapping mapping);

// Parses a scheme token as printed by SchemeConfig::name(), or "relo:<mapping>".
SchemeConfig parse_scheme(std::string_view token, double epsilon);

// Squared TD errors of one transition under the online and target networks,
// both measured against the same Bellman backup.
struct LossPair {
  double online_loss = 0.0;
  double target_loss = 0.0;
};

// online_loss + eps. Throws InvalidInput for negative or non-finite loss.
double per_priority(double online_loss, double eps);

// Reducible loss: online minus target loss. May be negative.
inline double relo(const LossPair& pair) { return pair.online_loss - pair.target_loss; }

inline double map_clip(double relo_value, double eps) {
  return (relo_value > 0.0 ? relo_value : 0.0) + eps;
}

double map_explinear(double relo_value);

// Raw (pre-alpha) priorities for a batch:
//   uniform -> 1
//   per     -> online_loss + eps
//   relo    -> f_map(online - target) + eps
std::vector<double> compute_raw_priorities(const SchemeConfig& config,
                                           std::span<const LossPair> pairs);

}  // namespace relo
