#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relo/experiment.hpp"

namespace relo::experiment {

// Ordered key/value pairs; later entries override earlier ones.
using Settings = std::vector<std::pair<std::string, std::string>>;

// Flat INI: `key = value` lines, `#` or `;` comments, section headers
// ignored. Throws ConfigError on malformed lines.
Settings parse_ini(std::istream& in);
Settings read_ini_file(const std::filesystem::path& path);

// Applies settings to a run configuration. `scheme` and `mapping` are
// resolved together once all keys are seen. Throws ConfigError for unknown
// keys or unparsable values.
class RunConfigBuilder {
 public:
  void set(std::string_view key, std::string_view value);
  void apply(const Settings& settings);
  RunConfig build() const;

 private:
  RunConfig config_;
  SchemeKind scheme_ = SchemeKind::relo;
  Mapping mapping_ = Mapping::clip;
  double epsilon_ = 1e-2;
};

RunConfig run_config_from(const Settings& settings);

// Adds `schemes` (comma list of uniform | per | relo | relo:<mapping>),
// `seeds` (comma list, ranges like 0-4 allowed) and `jobs` on top of the run
// keys.
SweepSpec sweep_spec_from(const Settings& settings);

}  // namespace relo::experiment
