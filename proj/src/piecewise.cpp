#include "gmlab/piecewise.hpp"

#include <algorithm>
#include <cmath>

namespace gm {

PiecewiseConstant::PiecewiseConstant(std::vector<Real> breaks, std::vector<Real> values)
    : breaks_(std::move(breaks)), values_(std::move(values)) {
  require(values_.size() == breaks_.size() + 1, "step function needs one more value than breakpoints");
  for (std::size_t i = 0; i < breaks_.size(); ++i) {
    require(std::isfinite(breaks_[i]) && breaks_[i] > 0, "breakpoints must be positive and finite");
    if (i > 0) require(breaks_[i] > breaks_[i - 1], "breakpoints must be strictly increasing");
  }
  for (Real v : values_) require(std::isfinite(v), "step values must be finite");
  cumulative_at_breaks_.resize(breaks_.size());
  Real acc = 0;
  Real prev = 0;
  for (std::size_t i = 0; i < breaks_.size(); ++i) {
    acc += values_[i] * (breaks_[i] - prev);
    cumulative_at_breaks_[i] = acc;
    prev = breaks_[i];
  }
}

PiecewiseConstant PiecewiseConstant::from_intervals(std::span<const Real> lo, std::span<const Real> hi,
                                                    std::span<const Real> value, Real tail_from,
                                                    Real tail) {
  require(lo.size() == hi.size() && lo.size() == value.size(), "interval arrays differ in length");
  std::vector<std::size_t> order(lo.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    require(lo[i] >= 0 && hi[i] > lo[i] && std::isfinite(hi[i]), "interval must satisfy 0 <= lo < hi < inf");
    order[i] = i;
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lo[a] < lo[b]; });
  for (std::size_t k = 1; k < order.size(); ++k)
    require(lo[order[k]] >= hi[order[k - 1]], "intervals overlap");
  if (!order.empty() && std::isfinite(tail_from))
    require(hi[order.back()] <= tail_from, "interval extends into the tail");

  std::vector<Real> pts;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    pts.push_back(lo[i]);
    pts.push_back(hi[i]);
  }
  if (std::isfinite(tail_from)) pts.push_back(tail_from);
  pts = detail::interior_points(std::move(pts), 0, kInf);

  auto value_at = [&](Real a) -> Real {
    if (std::isfinite(tail_from) && a >= tail_from) return tail;
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (a >= lo[i] && a < hi[i]) return value[i];
    return 0;
  };
  std::vector<Real> breaks;
  std::vector<Real> values{value_at(0)};
  for (Real p : pts) {
    Real v = value_at(p);
    if (v == values.back()) continue;
    breaks.push_back(p);
    values.push_back(v);
  }
  return PiecewiseConstant(std::move(breaks), std::move(values));
}

Real PiecewiseConstant::operator()(Real a) const {
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), a);
  return values_[static_cast<std::size_t>(it - breaks_.begin())];
}

Real PiecewiseConstant::cumulative(Real a) const {
  if (a <= 0) return 0;
  if (std::isinf(a)) return values_.back() > 0 ? kInf : cumulative_at_breaks_.empty() ? 0 : cumulative_at_breaks_.back();
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), a);
  auto idx = static_cast<std::size_t>(it - breaks_.begin());
  Real base = idx == 0 ? 0 : cumulative_at_breaks_[idx - 1];
  Real from = idx == 0 ? 0 : breaks_[idx - 1];
  return base + values_[idx] * (a - from);
}

Real PiecewiseConstant::min_value() const { return *std::min_element(values_.begin(), values_.end()); }
Real PiecewiseConstant::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

Real PiecewiseConstant::support_end() const {
  if (values_.back() != 0) return kInf;
  for (std::size_t i = values_.size() - 1; i-- > 0;)
    if (values_[i] != 0) return breaks_[i];
  return 0;
}

PiecewiseConstant PiecewiseConstant::scaled(Real factor) const {
  std::vector<Real> v = values_;
  for (Real& x : v) x *= factor;
  return PiecewiseConstant(breaks_, std::move(v));
}

namespace detail {

Real phi1(Real z) {
  if (std::abs(z) < 1e-4L) return 1 + z / 2 + z * z / 6 + z * z * z / 24 + z * z * z * z / 120;
  return std::expm1(z) / z;
}

Real phi2(Real z) {
  if (std::abs(z) < 1e-3L) {
    Real z2 = z * z;
    return 0.5L + z / 6 + z2 / 24 + z2 * z / 120 + z2 * z2 / 720 + z2 * z2 * z / 5040;
  }
  return (std::expm1(z) - z) / (z * z);
}

Real exp_moment0(Real rho, Real len) {
  if (std::isinf(len)) {
    if (rho <= 0) fail(ErrorCode::Domain, "divergent integral of a non-decaying exponential");
    return 1 / rho;
  }
  return len * phi1(-rho * len);
}

Real exp_moment1(Real rho, Real len) {
  if (std::isinf(len)) {
    if (rho <= 0) fail(ErrorCode::Domain, "divergent integral of a non-decaying exponential");
    return 1 / (rho * rho);
  }
  // int_0^1 u e^{zu} du; the closed form cancels badly for small z
  Real z = -rho * len;
  Real psi;
  if (std::abs(z) < 1) {
    psi = 0;
    Real term = 1;  // z^k / k!
    for (int k = 0; k < 40 && std::abs(term) > 1e-24L; ++k) {
      psi += term / (k + 2);
      term *= z / (k + 1);
    }
  } else {
    psi = ((z - 1) * std::exp(z) + 1) / (z * z);
  }
  return len * len * psi;
}

std::vector<Real> interior_points(std::vector<Real> points, Real lo, Real hi) {
  std::erase_if(points, [&](Real x) { return !(x > lo && x < hi); });
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

Real integrate_weighted_linear(const PiecewiseConstant& weight, const PiecewiseConstant& hazard,
                               Real shift, Real p, Real q, Real alpha, Real gamma) {
  if (!(q > p)) return 0;
  std::vector<Real> pts = weight.breaks();
  pts.insert(pts.end(), hazard.breaks().begin(), hazard.breaks().end());
  pts = interior_points(std::move(pts), p, q);
  pts.insert(pts.begin(), p);
  pts.push_back(q);

  Real total = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    Real lo = pts[i];
    Real hi = pts[i + 1];
    Real mid = std::isinf(hi) ? lo + 1 : lo + (hi - lo) / 2;
    Real w = weight(mid);
    if (w == 0) continue;
    Real rate = hazard(mid) + shift;
    Real len = hi - lo;
    Real pref = w * std::exp(-shift * lo - hazard.cumulative(lo));
    Real a0 = alpha + gamma * (lo - p);
    total += pref * (a0 * exp_moment0(rate, len) + (gamma == 0 ? 0 : gamma * exp_moment1(rate, len)));
  }
  return total;
}

}  // namespace detail
}  // namespace gm
