#include "relo/settings.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "relo/errors.hpp"

namespace relo::experiment {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss{std::string(text)};
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(std::string_view key, std::string_view value) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("'" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
  }
  return v;
}

std::uint64_t to_unsigned(std::string_view key, std::string_view value) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("'" + std::string(key) + "' expects a non-negative integer, got '" +
                      std::string(value) + "'");
  }
  return v;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "on" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "off" || value == "0" || value == "no") return false;
  throw ConfigError("'" + std::string(key) + "' expects a boolean, got '" + std::string(value) + "'");
}

std::vector<std::size_t> to_size_list(std::string_view key, std::string_view value) {
  std::vector<std::size_t> out;
  for (const std::string& item : split_list(value)) out.push_back(to_unsigned(key, item));
  return out;
}

std::vector<std::uint64_t> to_seed_list(std::string_view key, std::string_view value) {
  std::vector<std::uint64_t> out;
  for (const std::string& item : split_list(value)) {
    if (const auto dash = item.find('-'); dash != std::string::npos && dash > 0) {
      const std::uint64_t lo = to_unsigned(key, trim(item.substr(0, dash)));
      const std::uint64_t hi = to_unsigned(key, trim(item.substr(dash + 1)));
      if (hi < lo) throw ConfigError("'" + std::string(key) + "': empty range " + item);
      for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(to_unsigned(key, item));
    }
  }
  return out;
}

}  // namespace

Settings parse_ini(std::istream& in) {
  Settings out;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = line.substr(eq + 1);
    if (const auto hash = value.find('#'); hash != std::string::npos) value.resize(hash);
    value = trim(value);
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

Settings read_ini_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path.string());
  return parse_ini(f);
}

void RunConfigBuilder::set(std::string_view key, std::string_view value) {
  RunConfig& c = config_;
  auto num = [&] { return to_double(key, value); };
  auto count = [&] { return to_unsigned(key, value); };

  if (key == "env") {
    c.env.kind = envs::parse_env_kind(std::string(value));
  } else if (key == "seed") {
    c.seed = count();
  } else if (key == "steps") {
    c.total_env_steps = static_cast<std::int64_t>(count());
  } else if (key == "eval_every") {
    c.eval_every = static_cast<std::int64_t>(count());
  } else if (key == "eval_episodes") {
    c.eval_episodes = count();
  } else if (key == "timing") {
    c.record_timing = to_bool(key, value);
  } else if (key == "scheme") {
    scheme_ = parse_scheme_kind(value);
  } else if (key == "mapping") {
    mapping_ = parse_mapping(value);
  } else if (key == "epsilon") {
    epsilon_ = num();
  } else if (key == "alpha") {
    c.replay.alpha = num();
  } else if (key == "beta_start") {
    c.replay.beta.start = num();
  } else if (key == "beta_end") {
    c.replay.beta.end = num();
  } else if (key == "beta_horizon") {
    c.replay.beta.horizon = static_cast<std::int64_t>(count());
  } else if (key == "capacity") {
    c.replay.capacity = count();
  } else if (key == "gamma") {
    c.agent.gamma = num();
  } else if (key == "target_update") {
    if (value == "hard") {
      c.agent.target_update.mode = agent::TargetUpdate::Mode::hard;
    } else if (value == "ema") {
      c.agent.target_update.mode = agent::TargetUpdate::Mode::ema;
    } else {
      throw ConfigError("target_update expects hard | ema");
    }
  } else if (key == "target_period") {
    c.agent.target_update.period = static_cast<std::int64_t>(count());
  } else if (key == "tau") {
    c.agent.target_update.tau = num();
  } else if (key == "double_dqn") {
    c.agent.double_dqn = to_bool(key, value);
  } else if (key == "batch_size") {
    c.agent.batch_size = count();
  } else if (key == "train_start") {
    c.agent.train_start = count();
  } else if (key == "grad_steps") {
    c.agent.grad_steps_per_env_step = count();
  } else if (key == "explore_start") {
    c.agent.explore.start = num();
  } else if (key == "explore_end") {
    c.agent.explore.end = num();
  } else if (key == "explore_horizon") {
    c.agent.explore.horizon = static_cast<std::int64_t>(count());
  } else if (key == "lr") {
    c.agent.optimizer.learning_rate = num();
  } else if (key == "hidden") {
    c.agent.hidden = to_size_list(key, value);
  } else if (key == "length") {
    c.env.chain.length = count();
  } else if (key == "sigma") {
    c.env.chain.noise_std = num();
  } else if (key == "noisy_states") {
    c.env.chain.noisy_states = to_size_list(key, value);
  } else if (key == "chain_step_limit") {
    c.env.chain.step_limit = count();
  } else if (key == "grid_width") {
    c.env.grid.width = count();
  } else if (key == "grid_height") {
    c.env.grid.height = count();
  } else if (key == "slip") {
    c.env.grid.slip = num();
  } else if (key == "grid_step_limit") {
    c.env.grid.step_limit = count();
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

void RunConfigBuilder::apply(const Settings& settings) {
  for (const auto& [k, v] : settings) set(k, v);
}

RunConfig RunConfigBuilder::build() const {
  RunConfig c = config_;
  c.scheme.kind = scheme_;
  c.scheme.mapping = scheme_ == SchemeKind::relo ? std::optional<Mapping>(mapping_) : std::nullopt;
  c.set_epsilon(epsilon_);
  c.validate();
  return c;
}

RunConfig run_config_from(const Settings& settings) {
  RunConfigBuilder b;
  b.apply(settings);
  return b.build();
}

SweepSpec sweep_spec_from(const Settings& settings) {
  RunConfigBuilder b;
  std::vector<std::string> schemes = {"uniform", "per", "relo"};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::size_t jobs = 1;
  for (const auto& [k, v] : settings) {
    if (k == "schemes") {
      schemes = split_list(v);
    } else if (k == "seeds") {
      seeds = to_seed_list(k, v);
    } else if (k == "jobs") {
      jobs = to_unsigned(k, v);
    } else {
      b.set(k, v);
    }
  }
  SweepSpec spec;
  spec.base = b.build();
  for (const std::string& s : schemes) {
    spec.schemes.push_back(parse_scheme(s, spec.base.replay.epsilon));
  }
  spec.seeds = std::move(seeds);
  spec.jobs = jobs;
  if (spec.schemes.empty() || spec.seeds.empty()) {
    throw ConfigError("sweep needs at least one scheme and one seed");
  }
  return spec;
}

}  // namespace relo::experiment
