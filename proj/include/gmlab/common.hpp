#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace gm {

// Extended precision for all solver state. Perturbations of the unstable
// equilibrium grow like exp(0.16 t); 80-bit round-off keeps them below the
// stationarity tolerance over the horizons used here.
using Real = long double;

inline constexpr Real kInf = std::numeric_limits<Real>::infinity();

enum class ErrorCode {
  InvalidArgument = 1,
  Config = 2,
  NotBistable = 3,
  Domain = 4,
  Contraction = 5,
  IncompatibleHistory = 6,
  ComparisonViolation = 7,
  Io = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace gm
