#include "gmlab/profile.hpp"

#include <algorithm>
#include <cmath>

namespace gm {

// Pieces may overlap; the distribution is their sum. Each piece is itself
// nonnegative, which is all the solvers rely on.
InitialDistribution::InitialDistribution(std::vector<Piece> pieces) {
  for (const Piece& p : pieces) {
    require(std::isfinite(p.lo) && p.lo >= 0 && p.hi > p.lo, "initial pieces need 0 <= lo < hi");
    require(std::isfinite(p.c0) && std::isfinite(p.c1) && std::isfinite(p.k), "initial piece coefficients must be finite");
    if (p.c0 == 0 && p.c1 == 0) continue;
    require(p.c0 >= 0, "initial distribution must be nonnegative");
    if (std::isinf(p.hi)) {
      require(p.k > 0, "an unbounded initial piece needs a decaying exponential");
      require(p.c1 >= 0, "initial distribution must be nonnegative");
    } else {
      Real end = p.c0 + p.c1 * (p.hi - p.lo);
      require(end >= -1e-15L * (p.c0 + std::abs(p.c1) * (p.hi - p.lo)), "initial distribution must be nonnegative");
    }
    pieces_.push_back(p);
  }
  std::stable_sort(pieces_.begin(), pieces_.end(), [](const Piece& a, const Piece& b) { return a.lo < b.lo; });
}

InitialDistribution InitialDistribution::step(Real lo, Real hi, Real value) {
  return InitialDistribution({{lo, hi, value, 0, 0}});
}

InitialDistribution InitialDistribution::samples(Real h, const std::vector<Real>& values) {
  require(h > 0 && std::isfinite(h), "sample spacing must be positive");
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    require(values[i] >= 0 && values[i + 1] >= 0, "initial samples must be nonnegative");
    Real lo = h * static_cast<Real>(i);
    pieces.push_back({lo, h * static_cast<Real>(i + 1), values[i], (values[i + 1] - values[i]) / h, 0});
  }
  return InitialDistribution(std::move(pieces));
}

InitialDistribution InitialDistribution::exponential(Real c, Real k) {
  return InitialDistribution({{0, kInf, c, 0, k}});
}

InitialDistribution InitialDistribution::equilibrium(const ModelSpec& spec, int which) {
  Real kappa = spec.kappa(which);
  const PiecewiseConstant& mu = spec.mu().rate();
  std::vector<Piece> pieces;
  Real lo = 0;
  for (std::size_t i = 0; i <= mu.breaks().size(); ++i) {
    Real hi = i < mu.breaks().size() ? mu.breaks()[i] : kInf;
    pieces.push_back({lo, hi, kappa * std::exp(-mu.cumulative(lo)), 0, mu.values()[i]});
    lo = hi;
  }
  return InitialDistribution(std::move(pieces));
}

InitialDistribution InitialDistribution::scaled(Real factor) const {
  require(factor >= 0 && std::isfinite(factor), "scale factor must be finite and nonnegative");
  std::vector<Piece> p = pieces_;
  for (Piece& x : p) {
    x.c0 *= factor;
    x.c1 *= factor;
  }
  return InitialDistribution(std::move(p));
}

InitialDistribution InitialDistribution::operator+(const InitialDistribution& other) const {
  std::vector<Piece> p = pieces_;
  p.insert(p.end(), other.pieces_.begin(), other.pieces_.end());
  return InitialDistribution(std::move(p));
}

namespace {

Real piece_value(const InitialDistribution::Piece& p, Real a) {
  Real x = a - p.lo;
  return (p.c0 + p.c1 * x) * std::exp(-p.k * x);
}

}  // namespace

Real InitialDistribution::operator()(Real a) const {
  Real s = 0;
  for (const Piece& p : pieces_)
    if (a >= p.lo && a < p.hi) s += piece_value(p, a);
  return s;
}

Real InitialDistribution::left_limit(Real a) const {
  if (a <= 0) return (*this)(0);
  Real s = 0;
  for (const Piece& p : pieces_)
    if (a > p.lo && a <= p.hi) s += piece_value(p, a);
  return s;
}

Real InitialDistribution::l1_norm() const {
  Real s = 0;
  for (const Piece& p : pieces_) {
    Real len = p.hi - p.lo;
    s += p.c0 * detail::exp_moment0(p.k, len) + (p.c1 == 0 ? 0 : p.c1 * detail::exp_moment1(p.k, len));
  }
  return s;
}

Real InitialDistribution::support_end() const {
  Real e = 0;
  for (const Piece& p : pieces_) e = std::max(e, p.hi);
  return e;
}

std::vector<Real> InitialDistribution::breakpoints() const {
  std::vector<Real> b;
  for (const Piece& p : pieces_) {
    b.push_back(p.lo);
    if (std::isfinite(p.hi)) b.push_back(p.hi);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

Real InitialDistribution::transported_integral(const PiecewiseConstant& weight, const PiecewiseConstant& hazard,
                                               Real t, Real s_lo, Real s_hi) const {
  require(t >= 0, "transport time must be nonnegative");
  Real total = 0;
  for (const Piece& pc : pieces_) {
    Real p0 = std::max(pc.lo, s_lo);
    Real q0 = std::min(pc.hi, s_hi);
    if (!(q0 > p0)) continue;
    std::vector<Real> pts;
    for (Real b : hazard.breaks()) {
      pts.push_back(b);
      pts.push_back(b - t);
    }
    for (Real b : weight.breaks()) pts.push_back(b - t);
    pts = detail::interior_points(std::move(pts), p0, q0);
    pts.insert(pts.begin(), p0);
    pts.push_back(q0);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      Real p = pts[i], q = pts[i + 1];
      // rates looked up inside the segment, never on a shifted breakpoint
      Real mid = std::isinf(q) ? p + 1 : p + (q - p) / 2;
      Real w = weight(mid + t);
      if (w == 0) continue;
      Real drift = hazard(mid + t) - hazard(mid);
      Real rho = drift + pc.k;
      Real decay = hazard.cumulative(p + t) - hazard.cumulative(p) + pc.k * (p - pc.lo);
      Real alpha = pc.c0 + pc.c1 * (p - pc.lo);
      Real len = q - p;
      Real body = alpha * detail::exp_moment0(rho, len) + (pc.c1 == 0 ? 0 : pc.c1 * detail::exp_moment1(rho, len));
      total += w * std::exp(-decay) * body;
    }
  }
  return total;
}

}  // namespace gm
