#include "relo/priority.hpp"

#include <cmath>

#include "relo/errors.hpp"

namespace relo {

void SchemeConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be positive");
  if ((kind == SchemeKind::relo) != mapping.has_value()) {
    throw ConfigError("a mapping is required for relo and not allowed otherwise");
  }
}

std::string SchemeConfig::name() const {
  if (kind != SchemeKind::relo) return std::string(to_string(kind));
  if (mapping == Mapping::explinear) return "relo-explinear";
  return "relo";
}

SchemeKind parse_scheme_kind(std::string_view text) {
  if (text == "uniform") return SchemeKind::uniform;
  if (text == "per") return SchemeKind::per;
  if (text == "relo") return SchemeKind::relo;
  throw ConfigError("unknown scheme '" + std::string(text) + "' (uniform | per | relo)");
}

Mapping parse_mapping(std::string_view text) {
  if (text == "clip") return Mapping::clip;
  if (text == "explinear") return Mapping::explinear;
  throw ConfigError("unknown mapping '" + std::string(text) + "' (clip | explinear)");
}

std::string_view to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::uniform: return "uniform";
    case SchemeKind::per: return "per";
    case SchemeKind::relo: return "relo";
  }
  return "unknown";
}

std::string_view to_string(Mapping mapping) {
  return mapping == Mapping::clip ? "clip" : "explinear";
}

SchemeConfig parse_scheme(std::string_view token, double epsilon) {
  if (token == "relo-explinear") return SchemeConfig::relo(Mapping::explinear, epsilon);
  if (const auto colon = token.find(':'); colon != std::string_view::npos) {
    if (token.substr(0, colon) != "relo") {
      throw ConfigError("only relo accepts a mapping suffix: '" + std::string(token) + "'");
    }
    return SchemeConfig::relo(parse_mapping(token.substr(colon + 1)), epsilon);
  }
  switch (parse_scheme_kind(token)) {
    case SchemeKind::uniform: return SchemeConfig::uniform(epsilon);
    case SchemeKind::per: return SchemeConfig::per(epsilon);
    case SchemeKind::relo: return SchemeConfig::relo(Mapping::clip, epsilon);
  }
  throw ConfigError("unreachable scheme");
}

double per_priority(double online_loss, double eps) {
  if (!std::isfinite(online_loss) || online_loss < 0.0) {
    throw InvalidInput("per_priority: loss must be finite and non-negative");
  }
  return online_loss + eps;
}

double map_explinear(double relo_value) {
  return relo_value < 0.0 ? std::exp(relo_value) : relo_value + 1.0;
}

std::vector<double> compute_raw_priorities(const SchemeConfig& config,
                                           std::span<const LossPair> pairs) {
  if (pairs.empty()) throw InvalidInput("compute_raw_priorities: empty batch");
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const LossPair& pair : pairs) {
    if (!std::isfinite(pair.online_loss) || !std::isfinite(pair.target_loss) ||
        pair.online_loss < 0.0 || pair.target_loss < 0.0) {
      throw InvalidInput("compute_raw_priorities: losses must be finite and non-negative");
    }
    switch (config.kind) {
      case SchemeKind::uniform:
        out.push_back(1.0);
        break;
      case SchemeKind::per:
        out.push_back(per_priority(pair.online_loss, config.epsilon));
        break;
      case SchemeKind::relo:
        if (config.mapping == Mapping::explinear) {
          out.push_back(map_explinear(relo(pair)) + config.epsilon);
        } else {
          out.push_back(map_clip(relo(pair), config.epsilon));
        }
        break;
    }
  }
  return out;
}

}  // namespace relo
