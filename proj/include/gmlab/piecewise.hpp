#pragma once

#include <span>
#include <vector>

#include "gmlab/common.hpp"

namespace gm {

/// Right-continuous step function on [0, inf): values[0] on [0, breaks[0]),
/// values[i] on [breaks[i-1], breaks[i]), values.back() on [breaks.back(), inf).
class PiecewiseConstant {
 public:
  PiecewiseConstant() : values_{0} {}
  explicit PiecewiseConstant(Real constant) : values_{constant} {}
  PiecewiseConstant(std::vector<Real> breaks, std::vector<Real> values);

  /// Builds a step function from disjoint intervals [lo, hi) with the given
  /// values; zero elsewhere. `tail` is the value on [tail_from, inf).
  static PiecewiseConstant from_intervals(std::span<const Real> lo, std::span<const Real> hi,
                                          std::span<const Real> value, Real tail_from = kInf,
                                          Real tail = 0);

  Real operator()(Real a) const;
  /// Value on [a, a + eps) for a breakpoint-exact lookup.
  Real value_right_of(Real a) const { return (*this)(a); }
  /// Integral from 0 to a, closed form.
  Real cumulative(Real a) const;

  Real tail_value() const { return values_.back(); }
  Real min_value() const;
  Real max_value() const;
  /// Last age at which the function is nonzero (supremum of support), inf if tail != 0.
  Real support_end() const;

  PiecewiseConstant scaled(Real factor) const;

  const std::vector<Real>& breaks() const { return breaks_; }
  const std::vector<Real>& values() const { return values_; }

 private:
  std::vector<Real> breaks_;
  std::vector<Real> values_;
  std::vector<Real> cumulative_at_breaks_;
};

namespace detail {

/// (e^z - 1) / z, stable near 0.
Real phi1(Real z);
/// (e^z - 1 - z) / z^2, stable near 0.
Real phi2(Real z);

/// Integral of e^{-rho x} over [0, len]; len may be infinite when rho > 0.
Real exp_moment0(Real rho, Real len);
/// Integral of x e^{-rho x} over [0, len]; len may be infinite when rho > 0.
Real exp_moment1(Real rho, Real len);

/// Integral over [p, q] of weight(a) * exp(-shift*a - H(a)) * (alpha + gamma (a - p)),
/// where H is the cumulative of `hazard`. q may be infinite when the integrand
/// decays. Exact for the piecewise-constant families.
Real integrate_weighted_linear(const PiecewiseConstant& weight, const PiecewiseConstant& hazard,
                               Real shift, Real p, Real q, Real alpha, Real gamma);

/// Sorted, de-duplicated copy of `points` restricted to the open interval (lo, hi).
std::vector<Real> interior_points(std::vector<Real> points, Real lo, Real hi);

}  // namespace detail
}  // namespace gm
