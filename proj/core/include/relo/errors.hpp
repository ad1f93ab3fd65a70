#pragma once

#include <stdexcept>
#include <string>

namespace relo {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or argument mismatch on an API boundary.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Priority handed to the sum-tree or buffer that is negative, non-finite or
// below the epsilon floor.
class InvalidPriority : public Error {
 public:
  using Error::Error;
};

// Sampling requested from an empty tree or buffer.
class CannotSample : public Error {
 public:
  using Error::Error;
};

// Non-finite gradients or a loss above the divergence guard.
class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

// Environment stepped after the episode ended.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Bad configuration key or value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace relo
