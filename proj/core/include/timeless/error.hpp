#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace timeless {

enum class ErrorCode {
  DimensionMismatch,
  InvalidParameter,
  DegenerateClock,
  NotHermitian,
  OutOfRange,
  ZeroNorm,
  BoundaryIndex,
  NumericalDomain,
  UnsupportedSystem,
  Domain,
  NonOrthogonalClock,
  NumericalConsistency,
  Precondition,
  EmptySupport,
  NonCommuting,
  Config,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; `code()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace timeless
