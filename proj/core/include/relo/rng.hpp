#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace relo {

using Rng = std::mt19937_64;

// Seed for a named sub-stream of a run seed. Distinct names give
// statistically independent streams; the mapping is stable across builds.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

inline Rng make_stream(std::uint64_t seed, std::string_view stream) {
  return Rng(derive_seed(seed, stream));
}

// Uniform double in [0, 1) using the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) for n > 0.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace relo
