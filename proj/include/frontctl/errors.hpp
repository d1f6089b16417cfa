#pragma once

#include <stdexcept>
#include <string>

namespace frontctl {

/// Raised when an iterative or spectral computation does not deliver a
/// trustworthy result (non-convergence, NaN, cross-check disagreement).
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Raised for malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace frontctl
