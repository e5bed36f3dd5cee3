#pragma once

#include <stdexcept>
#include <string>

namespace skewlab {

/// Input left the validity region of an operation (|t| > delta etc).
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative solver ran out of its sweep budget.
struct NonConvergence : std::runtime_error {
  explicit NonConvergence(const std::string& what) : std::runtime_error(what) {}
};

/// A functional-equation coefficient solve hit a (near-)resonant divisor.
struct ResonanceError : std::runtime_error {
  explicit ResonanceError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed configuration or map description file.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace skewlab
