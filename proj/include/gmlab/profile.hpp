#pragma once

#include <vector>

#include "gmlab/common.hpp"
#include "gmlab/model.hpp"
#include "gmlab/piecewise.hpp"

namespace gm {

/// Initial age distribution u0 >= 0 built from pieces
/// u(a) = (c0 + c1 (a - lo)) exp(-k (a - lo)) on [lo, hi); zero elsewhere.
/// Sampled data is the k = 0 case (piecewise linear); hi may be infinite when k > 0.
class InitialDistribution {
 public:
  struct Piece {
    Real lo, hi;
    Real c0, c1, k;
  };

  InitialDistribution() = default;  // u0 = 0
  explicit InitialDistribution(std::vector<Piece> pieces);

  static InitialDistribution step(Real lo, Real hi, Real value);
  /// Piecewise-linear interpolant of samples on the grid {0, h, ..., (n-1) h}.
  static InitialDistribution samples(Real h, const std::vector<Real>& values);
  /// c exp(-k a) on [0, inf).
  static InitialDistribution exponential(Real c, Real k);
  /// kappa_which * survival(a); exact, with the exponential tail.
  static InitialDistribution equilibrium(const ModelSpec& spec, int which);

  InitialDistribution scaled(Real factor) const;
  InitialDistribution operator+(const InitialDistribution& other) const;

  /// Right limit u0(a+).
  Real operator()(Real a) const;
  /// Left limit u0(a-); equals u0(0) at a = 0.
  Real left_limit(Real a) const;
  Real l1_norm() const;
  /// Supremum of the support (inf for exponential tails).
  Real support_end() const;
  bool is_zero() const { return pieces_.empty(); }
  const std::vector<Piece>& pieces() const { return pieces_; }
  std::vector<Real> breakpoints() const;

  /// Integral over s in [s_lo, s_hi] of weight(s + t) exp(-(H(s + t) - H(s))) u0(s),
  /// in closed form. With weight = beta this is the transported initial-data
  /// birth term; with weight = 1 the surviving mass of the initial cohort.
  Real transported_integral(const PiecewiseConstant& weight, const PiecewiseConstant& hazard, Real t,
                            Real s_lo = 0, Real s_hi = kInf) const;

 private:
  std::vector<Piece> pieces_;
};

}  // namespace gm
