#include "gmlab/stability.hpp"

#include <cmath>
#include <limits>

namespace gm {

Real kernel_transform(const ModelSpec& spec, Real lambda) {
  if (!(lambda > -spec.mu_lower()))
    fail(ErrorCode::Domain, "characteristic function is defined for lambda > -mu_lower only");
  return detail::integrate_weighted_linear(spec.beta().profile(), spec.mu().rate(), lambda, 0, kInf, 1, 0);
}

Real characteristic_value(const ModelSpec& spec, int which, Real lambda) {
  return spec.f().derivative(spec.kappa(which)) * kernel_transform(spec, lambda);
}

Real unstable_root(const ModelSpec& spec) {
  auto G = [&](Real l) { return characteristic_value(spec, 1, l); };
  if (!(G(0) > 1)) fail(ErrorCode::NotBistable, "not bistable: G(0) <= 1 at kappa1, no positive root");
  Real lo = 0, hi = 1;
  while (G(hi) >= 1) {
    lo = hi;
    hi *= 2;
    if (hi > 1e12L) fail(ErrorCode::Domain, "no bracket for the unstable root");
  }
  for (int i = 0; i < 200 && hi - lo > 0; ++i) {
    Real m = lo + (hi - lo) / 2;
    if (m == lo || m == hi) break;
    (G(m) > 1 ? lo : hi) = m;
  }
  Real root = lo + (hi - lo) / 2;
  if (std::abs(G(root) - 1) > 1e-10L) fail(ErrorCode::Domain, "bisection did not reach |G - 1| <= 1e-10");
  Real eps = 1e-6L;
  if (!(G(root + eps) < G(root - eps))) fail(ErrorCode::Domain, "G is not decreasing at the root");
  return root;
}

Stability classify_stability(const ModelSpec& spec, int which) {
  Real g0 = characteristic_value(spec, which, 0);
  if (std::abs(g0 - 1) < 1e-12L) fail(ErrorCode::Domain, "marginal equilibrium (G(0) = 1), refusing to classify");
  return g0 < 1 ? Stability::Stable : Stability::Unstable;
}

std::vector<StabilityRow> stability_table(const ModelSpec& spec) {
  std::vector<StabilityRow> rows;
  for (int w = 0; w < 3; ++w) {
    StabilityRow r{w, spec.kappa(w), spec.f().derivative(spec.kappa(w)), classify_stability(spec, w),
                   std::numeric_limits<Real>::quiet_NaN()};
    if (r.stability == Stability::Unstable) r.root = unstable_root(spec);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace gm
