#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mrsde {

/// Raised when a run aborts for numerical reasons (overflow, failed
/// bracket, non-convergent optimizer).
class NumericalAbort : public std::runtime_error {
 public:
  explicit NumericalAbort(const std::string& what, std::int64_t step = -1)
      : std::runtime_error(what), step_(step) {}

  /// Grid step at which the abort happened, or -1 when not step-related.
  std::int64_t step() const noexcept { return step_; }

 private:
  std::int64_t step_;
};

class BracketFailure : public NumericalAbort {
 public:
  using NumericalAbort::NumericalAbort;
};

class NonConvergence : public NumericalAbort {
 public:
  using NumericalAbort::NumericalAbort;
};

/// The diffusion coefficient vanishes where a computation needs it
/// bounded away from zero.
class DegenerateDiffusion : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mrsde
