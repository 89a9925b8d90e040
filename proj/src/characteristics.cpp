#include "gmlab/characteristics.hpp"

#include <algorithm>
#include <cmath>

namespace gm {

namespace {

const PiecewiseConstant kOne(1);
const PiecewiseConstant kZero(0);

std::size_t node_index(const Trajectory& traj, Real t) {
  require(traj.step > 0 && !traj.b.empty(), "empty trajectory");
  Real r = t / traj.step;
  auto n = static_cast<std::size_t>(std::llround(r));
  require(t >= 0 && std::abs(r - static_cast<Real>(n)) <= 1e-9L * std::max<Real>(1, r),
          "reconstruction time must be a grid node");
  if (n >= traj.size()) fail(ErrorCode::Domain, "reconstruction time lies beyond the trajectory horizon");
  return n;
}

Real support_for_tail(const InitialDistribution& u0) {
  Real e = u0.support_end();
  if (std::isfinite(e)) return e;
  auto b = u0.breakpoints();
  return b.empty() ? 0 : b.back();
}

}  // namespace

std::shared_ptr<const AgeGrid> make_age_grid(const MortalityRate& mu, Real step, std::size_t cells) {
  require(step > 0 && cells > 0, "age grid needs a positive step and at least one cell");
  auto g = std::make_shared<AgeGrid>();
  g->step = step;
  g->mu = mu.rate();
  g->survival.resize(cells + 1);
  g->lower.resize(cells);
  g->upper.resize(cells);
  for (std::size_t i = 0; i <= cells; ++i) g->survival[i] = std::exp(-mu.cumulative(step * static_cast<Real>(i)));
  for (std::size_t i = 0; i < cells; ++i) {
    Real a = step * static_cast<Real>(i);
    g->lower[i] = detail::integrate_weighted_linear(kOne, g->mu, 0, a, a + step, 1, -1 / step);
    g->upper[i] = detail::integrate_weighted_linear(kOne, g->mu, 0, a, a + step, 0, 1 / step);
  }
  return g;
}

Real truncation_age(const ModelSpec& spec, const InitialDistribution& u0, Real t) {
  return support_for_tail(u0) + t + 10 / spec.mu_lower();
}

AgeDensity reconstruct(const ModelSpec& spec, const InitialDistribution& u0, const Trajectory& traj, Real t,
                       std::shared_ptr<const AgeGrid> grid) {
  std::size_t n = node_index(traj, t);
  Real h = traj.step;
  t = h * static_cast<Real>(n);
  auto cells = static_cast<std::size_t>(std::ceil(truncation_age(spec, u0, t) / h));
  if (!grid || grid->step != h || grid->cells() < cells) grid = make_age_grid(spec.mu(), h, cells);
  cells = grid->cells();

  AgeDensity d;
  d.t = t;
  d.grid = grid;
  d.left.resize(cells + 1);
  d.right.resize(cells + 1);
  const auto& S = grid->survival;
  for (std::size_t i = 0; i <= cells; ++i) {
    if (i < n) {
      d.left[i] = d.right[i] = S[i] * traj.b[n - i];
    } else if (i == n) {
      d.left[i] = S[i] * traj.b[0];
      d.right[i] = S[i] * u0(0);
    } else {
      Real ratio = S[i] / S[i - n];
      Real s = h * static_cast<Real>(i - n);
      d.left[i] = ratio * u0.left_limit(s);
      d.right[i] = ratio * u0(s);
    }
  }
  d.interface_jump = std::abs(d.left[n] - d.right[n]);
  Real a_trunc = grid->end();
  d.tail_mass = u0.transported_integral(kOne, grid->mu, t, a_trunc - t);
  d.tail_bound = std::exp(-spec.mu_lower() * (a_trunc - support_for_tail(u0))) * u0.l1_norm();
  return d;
}

AgeDensity equilibrium_density(const ModelSpec& spec, int which, Real step, std::size_t cells) {
  Real kappa = spec.kappa(which);
  AgeDensity d;
  d.grid = make_age_grid(spec.mu(), step, cells);
  d.left.resize(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) d.left[i] = kappa * d.grid->survival[i];
  d.right = d.left;
  d.tail_mass = kappa * detail::integrate_weighted_linear(kOne, d.grid->mu, 0, d.grid->end(), kInf, 1, 0);
  return d;
}

Real l1_norm(const AgeDensity& d) {
  const AgeGrid& g = *d.grid;
  Real s = 0;
  for (std::size_t i = 0; i < g.cells(); ++i)
    s += d.right[i] / g.survival[i] * g.lower[i] + d.left[i + 1] / g.survival[i + 1] * g.upper[i];
  return s + d.tail_mass;
}

Real l1_distance_to_equilibrium(const AgeDensity& d, const ModelSpec& spec, int which) {
  const AgeGrid& g = *d.grid;
  Real kappa = spec.kappa(which);
  Real s = 0;
  for (std::size_t i = 0; i < g.cells(); ++i) {
    Real gl = d.right[i] / g.survival[i] - kappa;
    Real gr = d.left[i + 1] / g.survival[i + 1] - kappa;
    if ((gl >= 0 && gr >= 0) || (gl <= 0 && gr <= 0)) {
      s += std::abs(gl) * g.lower[i] + std::abs(gr) * g.upper[i];
      continue;
    }
    // the linear factor changes sign inside the cell
    Real a = g.step * static_cast<Real>(i);
    Real slope = (gr - gl) / g.step;
    Real root = a + g.step * gl / (gl - gr);
    s += std::abs(detail::integrate_weighted_linear(kOne, g.mu, 0, a, root, gl, slope));
    s += std::abs(detail::integrate_weighted_linear(kOne, g.mu, 0, root, a + g.step, 0, slope));
  }
  Real tail_eq = kappa * detail::integrate_weighted_linear(kOne, g.mu, 0, g.end(), kInf, 1, 0);
  return s + std::abs(d.tail_mass - tail_eq);
}

InitialDistribution state_at(const ModelSpec& spec, const InitialDistribution& u0, const Trajectory& traj,
                             std::size_t n) {
  require(n < traj.size(), "state index beyond the trajectory");
  const PiecewiseConstant& mu = spec.mu().rate();
  Real h = traj.step;
  Real t = h * static_cast<Real>(n);
  std::vector<InitialDistribution::Piece> pieces;

  for (std::size_t i = 0; i < n; ++i) {
    Real a = h * static_cast<Real>(i);
    Real bl = traj.b[n - i], br = traj.b[n - i - 1];
    Real slope = (br - bl) / h;
    std::vector<Real> pts = detail::interior_points(mu.breaks(), a, a + h);
    pts.insert(pts.begin(), a);
    pts.push_back(a + h);
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
      Real p = pts[j], q = pts[j + 1];
      Real sp = std::exp(-mu.cumulative(p));
      Real bp = bl + slope * (p - a);
      pieces.push_back({p, q, sp * bp, sp * slope, mu(p + (q - p) / 2)});
    }
  }

  for (const auto& pc : u0.pieces()) {
    Real lo = pc.lo + t, hi = pc.hi + t;
    std::vector<Real> pts;
    for (Real b : mu.breaks()) {
      pts.push_back(b);
      pts.push_back(b + t);
    }
    pts = detail::interior_points(std::move(pts), lo, hi);
    pts.insert(pts.begin(), lo);
    pts.push_back(hi);
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
      Real p = pts[j], q = pts[j + 1];
      Real mid = std::isinf(q) ? p + 1 : p + (q - p) / 2;
      Real x = p - t - pc.lo;
      Real factor = std::exp(-(mu.cumulative(p) - mu.cumulative(p - t)) - pc.k * x);
      Real k = pc.k + mu(mid) - mu(mid - t);
      pieces.push_back({p, q, factor * (pc.c0 + pc.c1 * x), factor * pc.c1, k});
    }
  }
  return InitialDistribution(std::move(pieces));
}

Real mass_beyond(const ModelSpec& spec, const InitialDistribution& u0, const Trajectory& traj, std::size_t n,
                 Real age) {
  require(n < traj.size(), "state index beyond the trajectory");
  const PiecewiseConstant& mu = spec.mu().rate();
  Real h = traj.step;
  Real t = h * static_cast<Real>(n);
  // newborn part: S(a) b(t - a) with b linear per cell
  Real total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Real a = h * static_cast<Real>(i);
    if (a + h <= age) continue;
    Real bl = traj.b[n - i], br = traj.b[n - i - 1];
    Real slope = (br - bl) / h;
    Real p = std::max(a, age);
    total += detail::integrate_weighted_linear(kOne, mu, 0, p, a + h, bl + slope * (p - a), slope);
  }
  // transported cohort: ages s + t with s the initial age
  Real from = std::max<Real>(0, age - t);
  if (!u0.is_zero()) total += u0.transported_integral(kOne, mu, t, from);
  return total;
}

}  // namespace gm
