#pragma once

#include <stdexcept>
#include <string>

namespace corsched {

// Bad or inconsistent configuration (unknown key, out-of-range value,
// overlapping seed ranges). CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A required on-disk artifact (threshold surface, cells file) is absent.
// CLI maps this to exit code 3.
struct MissingArtifactError : std::runtime_error {
  explicit MissingArtifactError(const std::string& what)
      : std::runtime_error(what) {}
};

// Numerical failure that invalidates a whole run (not a single cell).
// CLI maps this to exit code 4.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Singular or non-finite state hit inside geometry/dynamics. The rollout
// engine catches this and marks the trace failed instead of patching values.
struct DegenerateStateError : std::runtime_error {
  explicit DegenerateStateError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace corsched
