#include "relo/envs.hpp"

#include <algorithm>
#include <random>

#include "relo/errors.hpp"

namespace relo::envs {

std::vector<double> one_hot(std::size_t index, std::size_t size) {
  std::vector<double> v(size, 0.0);
  v[index] = 1.0;
  return v;
}

NoisyChain::NoisyChain(NoisyChainConfig config) : config_(std::move(config)) {
  if (config_.length < 2) throw ConfigError("noisy_chain: length must be >= 2");
  if (!(config_.noise_std >= 0.0)) throw ConfigError("noisy_chain: noise_std must be >= 0");
  if (config_.step_limit == 0) config_.step_limit = 4 * config_.length;
  if (config_.noisy_states.empty()) {
    for (std::size_t s = config_.length / 3; s < 2 * config_.length / 3; ++s) {
      config_.noisy_states.push_back(s);
    }
  }
  noisy_.assign(config_.length, false);
  for (std::size_t s : config_.noisy_states) {
    if (s >= config_.length) throw ConfigError("noisy_chain: noisy state out of range");
    noisy_[s] = true;
  }
}

std::vector<double> NoisyChain::reset(Rng&) {
  position_ = 0;
  steps_ = 0;
  over_ = false;
  return one_hot(position_, config_.length);
}

EnvStep NoisyChain::step(std::size_t action, Rng& rng) {
  if (over_) throw ProtocolError("noisy_chain: step after episode end; call reset");
  if (action >= 2) throw InvalidInput("noisy_chain: action out of range");
  const std::size_t departed = position_;
  if (action == kRight) {
    position_ += 1;
  } else if (position_ > 0) {
    position_ -= 1;
  }
  ++steps_;

  EnvStep out;
  out.tag = noisy_[departed] ? Tag::noisy : Tag::clean;
  out.done = position_ == config_.length - 1;
  out.reward = out.done ? 1.0 : 0.0;
  if (noisy_[departed] && config_.noise_std > 0.0) {
    out.reward += std::normal_distribution<double>(0.0, config_.noise_std)(rng);
  }
  out.truncated = !out.done && steps_ >= config_.step_limit;
  out.next_obs = one_hot(position_, config_.length);
  over_ = out.episode_over();
  return out;
}

std::unique_ptr<Environment> NoisyChain::clone() const {
  return std::make_unique<NoisyChain>(config_);
}

WindyGrid::WindyGrid(WindyGridConfig config) : config_(config) {
  if (config_.width == 0 || config_.height == 0 || config_.width * config_.height < 2) {
    throw ConfigError("windy_grid: grid needs at least two cells");
  }
  if (!(config_.slip >= 0.0 && config_.slip <= 1.0)) throw ConfigError("windy_grid: slip in [0,1]");
  if (config_.step_limit == 0) throw ConfigError("windy_grid: step_limit must be positive");
  optimal_return_ = solve_optimal_return();
}

std::size_t WindyGrid::move(std::size_t cell, std::size_t action) const {
  const std::size_t w = config_.width;
  const std::size_t row = cell / w;
  const std::size_t col = cell % w;
  switch (action) {
    case kUp: return row > 0 ? cell - w : cell;
    case kDown: return row + 1 < config_.height ? cell + w : cell;
    case kLeft: return col > 0 ? cell - 1 : cell;
    case kRight: return col + 1 < w ? cell + 1 : cell;
    default: throw InvalidInput("windy_grid: action out of range");
  }
}

// Finite-horizon dynamic programming over (cell, steps remaining).
double WindyGrid::solve_optimal_return() const {
  const std::size_t cells = observation_dim();
  const std::size_t goal = goal_cell();
  std::vector<double> value(cells, 0.0);
  std::vector<double> next(cells, 0.0);
  for (std::size_t remaining = 1; remaining <= config_.step_limit; ++remaining) {
    for (std::size_t c = 0; c < cells; ++c) {
      if (c == goal) {
        next[c] = 0.0;
        continue;
      }
      auto outcome = [&](std::size_t a) {
        const std::size_t to = move(c, a);
        return (to == goal ? config_.goal_reward : 0.0) - config_.step_penalty + value[to];
      };
      double slip_mean = 0.0;
      for (std::size_t a = 0; a < 4; ++a) slip_mean += outcome(a) / 4.0;
      double best = -1e300;
      for (std::size_t a = 0; a < 4; ++a) {
        best = std::max(best, (1.0 - config_.slip) * outcome(a) + config_.slip * slip_mean);
      }
      next[c] = best;
    }
    value.swap(next);
  }
  return value[start_cell()];
}

std::vector<double> WindyGrid::reset(Rng&) {
  cell_ = start_cell();
  steps_ = 0;
  over_ = false;
  return one_hot(cell_, observation_dim());
}

EnvStep WindyGrid::step(std::size_t action, Rng& rng) {
  if (over_) throw ProtocolError("windy_grid: step after episode end; call reset");
  if (action >= 4) throw InvalidInput("windy_grid: action out of range");
  std::size_t taken = action;
  if (uniform01(rng) < config_.slip) taken = uniform_index(rng, 4);
  cell_ = move(cell_, taken);
  ++steps_;

  EnvStep out;
  out.tag = taken != action ? Tag::noisy : Tag::clean;
  out.done = cell_ == goal_cell();
  out.reward = (out.done ? config_.goal_reward : 0.0) - config_.step_penalty;
  out.truncated = !out.done && steps_ >= config_.step_limit;
  out.next_obs = one_hot(cell_, observation_dim());
  over_ = out.episode_over();
  return out;
}

std::unique_ptr<Environment> WindyGrid::clone() const { return std::make_unique<WindyGrid>(config_); }

std::unique_ptr<Environment> make_environment(const EnvConfig& config) {
  switch (config.kind) {
    case EnvKind::noisy_chain: return std::make_unique<NoisyChain>(config.chain);
    case EnvKind::windy_grid: return std::make_unique<WindyGrid>(config.grid);
  }
  throw ConfigError("unknown environment kind");
}

EnvKind parse_env_kind(const std::string& text) {
  if (text == "noisy_chain") return EnvKind::noisy_chain;
  if (text == "windy_grid") return EnvKind::windy_grid;
  throw ConfigError("unknown env '" + text + "' (noisy_chain | windy_grid)");
}

}  // namespace relo::envs
