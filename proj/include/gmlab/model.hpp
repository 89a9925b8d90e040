#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gmlab/common.hpp"
#include "gmlab/piecewise.hpp"

namespace gm {

/// Age-specific mortality: piecewise constant with a constant tail, bounded
/// below by mu_lower > 0.
class MortalityRate {
 public:
  static MortalityRate constant(Real value);
  static MortalityRate piecewise(std::vector<Real> breaks, std::vector<Real> values);

  bool is_constant() const { return rate_.breaks().empty(); }
  Real operator()(Real a) const { return rate_(a); }
  Real cumulative(Real a) const { return rate_.cumulative(a); }
  Real lower_bound() const { return rate_.min_value(); }
  Real tail_value() const { return rate_.tail_value(); }
  /// Age beyond which the rate is constant.
  Real last_break() const { return rate_.breaks().empty() ? 0 : rate_.breaks().back(); }
  const PiecewiseConstant& rate() const { return rate_; }

 private:
  explicit MortalityRate(PiecewiseConstant rate);
  PiecewiseConstant rate_;
};

enum class BirthRateKind { CompactSupport, EventuallyConstant };

/// Step birth rate. Compactly supported on [0, a_star], or equal to beta_inf
/// for every age beyond the switch age a0.
class BirthRate {
 public:
  struct Interval {
    Real lo, hi, value;
  };

  static BirthRate compact(const std::vector<Interval>& intervals);
  static BirthRate eventually_constant(const std::vector<Interval>& interior, Real a0, Real beta_inf);

  BirthRateKind kind() const { return kind_; }
  bool compact_support() const { return kind_ == BirthRateKind::CompactSupport; }
  Real operator()(Real a) const { return profile_(a); }
  /// Maximal reproductive age; infinite for the eventually-constant kind.
  Real a_star() const { return a_star_; }
  Real switch_age() const { return a0_; }
  Real beta_inf() const { return beta_inf_; }
  Real upper_bound() const { return profile_.max_value(); }
  const PiecewiseConstant& profile() const { return profile_; }

  BirthRate scaled(Real factor) const;

 private:
  BirthRate(BirthRateKind kind, PiecewiseConstant profile, Real a0, Real beta_inf);
  BirthRateKind kind_;
  PiecewiseConstant profile_;
  Real a_star_;
  Real a0_;
  Real beta_inf_;
};

enum class BirthFunctionKind { Hill, Table };

/// Monotone birth function f. Hill kind: f(x) = A x^2 / (B + x^2), whose
/// positive fixed points solve x^2 - A x + B = 0. Table kind: piecewise
/// linear through (0, 0) and the given points, extrapolated with the last slope.
class BirthFunction {
 public:
  static BirthFunction hill(Real A, Real B);
  static BirthFunction table(std::vector<Real> xs, std::vector<Real> ys);
  /// Linear f(x) = slope * x. Not bistable; used as a test harness.
  static BirthFunction linear(Real slope);

  BirthFunctionKind kind() const { return kind_; }
  Real operator()(Real x) const;
  Real derivative(Real x) const;
  Real lipschitz_bound() const { return lipschitz_; }
  Real hill_A() const { return A_; }
  Real hill_B() const { return B_; }
  const std::vector<Real>& table_x() const { return xs_; }
  const std::vector<Real>& table_y() const { return ys_; }
  /// Closed-form positive fixed points (hill kind only).
  std::optional<std::pair<Real, Real>> closed_form_fixed_points() const;
  /// Scan bound large enough to contain every positive fixed point.
  Real default_scan_bound() const;

 private:
  BirthFunction() = default;
  BirthFunctionKind kind_ = BirthFunctionKind::Hill;
  Real A_ = 0, B_ = 0;
  std::vector<Real> xs_, ys_;
  Real lipschitz_ = 0;
};

/// One-line PASS/FAIL record of an assumption check.
struct Check {
  std::string name;
  bool passed;
  double value;
  std::string detail;
};

struct AssumptionReport {
  std::vector<Check> checks;
  bool all_passed() const;
  /// First failing check, if any.
  const Check* first_failure() const;
};

inline constexpr Real kClosedFormNormTolerance = 1e-10L;

/// Validated model ingredients (mu, beta, f) together with the fixed points of f.
class ModelSpec {
 public:
  /// Throws gm::Error (NotBistable / InvalidArgument) when any assumption fails.
  ModelSpec(MortalityRate mu, BirthRate beta, BirthFunction f, Real norm_tolerance = kClosedFormNormTolerance);

  const MortalityRate& mu() const { return mu_; }
  const BirthRate& beta() const { return beta_; }
  const BirthFunction& f() const { return f_; }
  Real norm_tolerance() const { return norm_tolerance_; }
  Real kappa1() const { return kappa1_; }
  Real kappa2() const { return kappa2_; }
  /// 0, kappa1, kappa2 for which = 0, 1, 2.
  Real kappa(int which) const;
  Real mu_lower() const { return mu_.lower_bound(); }
  Real beta_upper() const { return beta_.upper_bound(); }

  /// Largest step for which the implicit birth update is a contraction.
  Real max_step() const;
  /// min(max_step/4, a*/64); for eventually-constant beta, a0/2^k below that bound.
  Real default_step() const;

 private:
  MortalityRate mu_;
  BirthRate beta_;
  BirthFunction f_;
  Real norm_tolerance_;
  Real kappa1_ = 0, kappa2_ = 0;
};

Real survival(const MortalityRate& mu, Real a);

/// Integral of beta(a) exp(-int_0^a mu) over [0, inf), closed form.
Real normalization_integral(const BirthRate& beta, const MortalityRate& mu);
inline Real normalization_integral(const ModelSpec& spec) {
  return normalization_integral(spec.beta(), spec.mu());
}

/// Rescales beta so that the normalization integral equals one.
BirthRate normalize_birth_rate(const BirthRate& raw, const MortalityRate& mu);

/// Positive roots of f(x) = x on (0, x_max] by sign-change scan and bisection.
/// Throws NotBistable unless exactly two are found.
std::pair<Real, Real> find_fixed_points(const BirthFunction& f, Real x_max);

/// Runs every structural check on (mu, beta, f); the eventually-constant
/// birth rate adds the switch-age checks.
AssumptionReport check_assumptions(const MortalityRate& mu, const BirthRate& beta, const BirthFunction& f,
                                   Real norm_tolerance = kClosedFormNormTolerance);

/// Constants (rho, M) with f(x) <= rho x for x >= M, used by the boundedness estimate.
struct SubdiagonalConstants {
  Real rho;
  Real M;
};
SubdiagonalConstants subdiagonal_constants(const ModelSpec& spec);

}  // namespace gm
