#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "gmlab/volterra.hpp"
#include "oracles.hpp"
#include "random_profiles.hpp"

using namespace gm;

namespace {

Real max_dev(const std::vector<Real>& v, Real target) {
  Real d = 0;
  for (Real x : v) d = std::max(d, std::abs(x - target));
  return d;
}

}  // namespace

TEST_CASE("kernel weights against quadrature") {
  auto spec = oracle::reference_spec();
  Real h = 0.125L;
  auto w = kernel_weights(spec, h);
  Real total = 0;
  for (std::size_t k = 0; k < w.head_cells(); ++k) total += w.later(k) + w.earlier(k);
  CHECK(std::abs(total - 1) < 1e-15L);

  auto K = [&](Real a) { return spec.beta()(a) * std::exp(-0.5L * a); };
  for (std::size_t k : {7u, 8u, 9u, 15u, 23u}) {
    Real lo = h * k, hi = lo + h;
    Real later = oracle::integrate_split([&](Real a) { return K(a) * (hi - a) / h; }, {lo, 1, 3, hi}, 400);
    Real earlier = oracle::integrate_split([&](Real a) { return K(a) * (a - lo) / h; }, {lo, 1, 3, hi}, 400);
    CHECK(std::abs(w.later(k) - later) < 1e-13L);
    CHECK(std::abs(w.earlier(k) - earlier) < 1e-13L);
  }
  // past a* everything vanishes
  CHECK(w.later(w.head_cells() + 3) == 0);

  auto tail = oracle::tail_reference_spec();
  auto wt = kernel_weights(tail, 0.25L);
  CHECK(wt.geometric);
  Real sum = 0;
  for (std::size_t k = 0; k < 4000; ++k) sum += wt.later(k) + wt.earlier(k);
  CHECK(std::abs(sum - 1) < 1e-12L);
}

TEST_CASE("zero data gives zero flux") {
  auto spec = oracle::reference_spec();
  auto tr = solve_b(spec, InitialDistribution(), 100, spec.default_step());
  CHECK(max_dev(tr.b, 0) == 0);
}

TEST_CASE("equilibria are stationary") {
  auto spec = oracle::reference_spec();
  for (int which : {1, 2}) {
    auto u0 = InitialDistribution::equilibrium(spec, which);
    auto tr = solve_b(spec, u0, 100, spec.default_step());
    CHECK(max_dev(tr.b, spec.kappa(which)) <= 10 * kFixedPointTol);
  }
  auto tail = oracle::tail_reference_spec();
  for (int which : {1, 2}) {
    auto tr = solve_b(tail, InitialDistribution::equilibrium(tail, which), 50, tail.default_step());
    CHECK(max_dev(tr.b, tail.kappa(which)) <= 10 * kFixedPointTol);
  }
}

TEST_CASE("large data persists, small data dies out") {
  auto spec = oracle::reference_spec();
  Real h = spec.default_step();
  for (Real step : {h, h / 2}) {
    auto big = solve_b(spec, InitialDistribution::step(0, 3, 5), 200, step);
    auto small = solve_b(spec, InitialDistribution::step(0, 3, 0.01L), 200, step);
    std::vector<Real> tb(big.b.begin() + big.trailing_begin(), big.b.end());
    std::vector<Real> ts(small.b.begin() + small.trailing_begin(), small.b.end());
    CHECK(max_dev(tb, spec.kappa2()) < 1e-3L);
    CHECK(max_dev(ts, 0) < 1e-6L);
  }
}

TEST_CASE("the cumulative solve satisfies b = f(B)") {
  auto spec = oracle::reference_spec();
  std::mt19937_64 rng(11);
  for (int i = 0; i < 4; ++i) {
    auto u0 = oracle::random_steps(rng);
    Real h = spec.default_step();
    auto tr = solve_B(spec, u0, 60, h);
    auto direct = solve_b(spec, u0, 60, h);
    REQUIRE(tr.B.size() == tr.b.size());
    Real worst = 0, vs_direct = 0;
    for (std::size_t n = 0; n < tr.size(); ++n) {
      worst = std::max(worst, std::abs(tr.b[n] - spec.f()(tr.B[n])));
      vs_direct = std::max(vs_direct, std::abs(tr.b[n] - direct.b[n]));
    }
    CHECK(worst <= identity_tol(h));
    // the two discretizations agree to the same order
    CHECK(vs_direct < 50 * h * h);
  }
}

TEST_CASE("history restart reproduces the continuation") {
  auto spec = oracle::reference_spec();
  Real h = spec.default_step();
  auto full = solve_b(spec, InitialDistribution::step(0, 3, 1.5L), 60, h);
  std::size_t cells = static_cast<std::size_t>(std::lround(3 / h));
  std::size_t s = static_cast<std::size_t>(std::lround(21 / h));
  auto phi = history_from(full, s, cells);
  auto rest = solve_from_history(spec, phi, 39);
  REQUIRE(s + rest.size() == full.size());
  Real dev = 0;
  for (std::size_t n = 0; n < rest.size(); ++n) dev = std::max(dev, std::abs(rest.b[n] - full.b[s + n]));
  CHECK(dev < 1e-10L);
  CHECK(rest.compatibility_residual < kHistoryTol);
}

TEST_CASE("history checks") {
  auto spec = oracle::reference_spec();
  Real h = spec.default_step();
  std::size_t cells = static_cast<std::size_t>(std::lround(3 / h));
  auto eq = HistoryFn::constant(h, cells, spec.kappa1());
  CHECK(compatibility_residual(spec, eq) < 1e-14L);
  auto tr = solve_from_history(spec, eq, 50);
  CHECK(max_dev(tr.b, spec.kappa1()) <= 10 * kFixedPointTol);

  // a jump at zero: phi = 1 in the past, then value 0 at t = 0
  std::vector<Real> v(cells + 1, 1);
  v.back() = 0;
  HistoryFn jump(h, v);
  CHECK(compatibility_residual(spec, jump) > 0.1L);
  CHECK_THROWS_AS(solve_from_history(spec, jump, 10), Error);
  try {
    solve_from_history(spec, jump, 10);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IncompatibleHistory);
  }
  CHECK_NOTHROW(solve_from_history(spec, jump, 10, {}, false));
  CHECK_THROWS_AS(solve_from_history(oracle::tail_reference_spec(), eq, 10), Error);
}

TEST_CASE("step bound is enforced") {
  auto spec = oracle::reference_spec();
  Real dmax = 1 / (spec.f().lipschitz_bound() * spec.beta_upper());
  CHECK(std::abs(spec.max_step() - dmax) < 1e-15L);
  try {
    solve_b(spec, InitialDistribution::step(0, 3, 1), 10, 2 * dmax);
    FAIL("expected a contraction error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Contraction);
  }
  CHECK_THROWS_AS(grid_nodes(spec, 0.01L, 0.5L), Error);
}

TEST_CASE("successive approximations increase monotonically") {
  auto spec = oracle::reference_spec();
  auto it = successive_approximations(spec, InitialDistribution::step(0, 3, 1.5L), 20, spec.default_step(), 12);
  REQUIRE(it.size() >= 2);
  for (std::size_t k = 1; k < it.size(); ++k)
    for (std::size_t n = 0; n < it[k].size(); ++n) CHECK(it[k][n] >= it[k - 1][n] - 1e-15L);
}

TEST_CASE("comparison on ordered data") {
  auto spec = oracle::reference_spec();
  std::mt19937_64 rng(5);
  Real h = spec.default_step();
  for (int i = 0; i < 6; ++i) {
    auto u = oracle::random_steps(rng);
    auto v = u + oracle::random_steps(rng, 1);
    auto bu = solve_b(spec, u, 80, h), bv = solve_b(spec, v, 80, h);
    Real worst = 0;
    for (std::size_t n = 0; n < bu.size(); ++n) worst = std::max(worst, bu.b[n] - bv.b[n]);
    CHECK(worst <= kFixedPointTol);
  }
}

TEST_CASE("second-order convergence") {
  auto spec = oracle::reference_spec();
  auto u0 = InitialDistribution::step(0, 3, 1.5L);
  Real h = spec.default_step();
  auto a = solve_b(spec, u0, 24, h), b = solve_b(spec, u0, 24, h / 2), c = solve_b(spec, u0, 24, h / 4);
  REQUIRE(c.size() == 4 * a.size() - 3);
  Real e1 = 0, e2 = 0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    e1 = std::max(e1, std::abs(a.b[n] - b.b[2 * n]));
    e2 = std::max(e2, std::abs(b.b[2 * n] - c.b[4 * n]));
  }
  Real ratio = e1 / e2;
  CHECK(ratio >= 2.8L);
  CHECK(ratio <= 5.2L);
}

TEST_CASE("boundedness estimate") {
  auto spec = oracle::reference_spec();
  for (Real height : {0.01L, 1.5L, 5.0L}) {
    auto u0 = InitialDistribution::step(0, 3, height);
    auto tr = solve_B(spec, u0, 200, spec.default_step());
    auto r = l1_bound_check(spec, u0, tr);
    CHECK(r.bound_holds);
    CHECK(r.limsup_admissible);
    CHECK(r.liminf_admissible);
    CHECK(r.max_B <= r.bound);
  }
}
