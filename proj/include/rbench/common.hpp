#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rbench {

// Invalid arguments or configs: caller error, maps to CLI exit code 1.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Failures while computing: numerical blow-up, non-convergence, degenerate
// data. Maps to CLI exit code 2.
struct ComputeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IntegrationError : ComputeError {
  IntegrationError(const std::string& what, std::size_t step)
      : ComputeError(what + " (step " + std::to_string(step) + ")"), step_index(step) {}
  std::size_t step_index;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

}  // namespace rbench
