#pragma once

#include <string_view>
#include <vector>

namespace relo {

// Diagnostic group label carried by environment steps and stored
// transitions. "noisy" marks steps whose outcome carries irreducible
// randomness; everything else is "clean".
enum class Tag { clean, noisy };

constexpr std::string_view to_string(Tag tag) { return tag == Tag::noisy ? "noisy" : "clean"; }

struct Transition {
  std::vector<double> state;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  // True only for true terminal states; time-limit truncation stores false.
  bool done = false;
  Tag tag = Tag::clean;
};

}  // namespace relo
