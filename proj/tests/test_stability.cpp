#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "gmlab/stability.hpp"
#include "gmlab/volterra.hpp"
#include "oracles.hpp"

using namespace gm;

namespace {

// reference kernel: c on [1, 3], mu = 0.5
Real reference_transform(Real lambda) {
  Real r = lambda + 0.5L;
  return oracle::reference_c() * (std::exp(-r) - std::exp(-3 * r)) / r;
}

Real bisect_root(const std::function<Real(Real)>& g, Real lo, Real hi) {
  for (int i = 0; i < 200; ++i) {
    Real mid = (lo + hi) / 2;
    (g(mid) > 1 ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

}  // namespace

TEST_CASE("characteristic function values") {
  auto spec = oracle::reference_spec();
  CHECK(std::abs(characteristic_value(spec, 1, 0) - 4.0L / 3) < 1e-15L);
  CHECK(std::abs(characteristic_value(spec, 2, 0) - 2.0L / 3) < 1e-15L);
  CHECK(characteristic_value(spec, 0, 0) == 0);
  CHECK(characteristic_value(spec, 1, 1000) < 1e-6L);
  for (Real l : {-0.3L, 0.0L, 0.1L, 0.7L, 3.0L})
    CHECK(std::abs(kernel_transform(spec, l) - reference_transform(l)) < 1e-15L);
  // quadrature of the same transform
  Real q = oracle::integrate_split(
      [&](Real a) { return spec.beta()(a) * std::exp(-0.2L * a - 0.5L * a); }, {0, 1, 3, 4}, 2000);
  CHECK(std::abs(kernel_transform(spec, 0.2L) - q) < 1e-12L);
  CHECK_THROWS_AS(characteristic_value(spec, 1, -0.6L), Error);
}

TEST_CASE("G decreases along the real axis") {
  auto spec = oracle::reference_spec();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.45, 20);
  for (int i = 0; i < 200; ++i) {
    Real a = u(rng), b = u(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    CHECK(characteristic_value(spec, 1, a) > characteristic_value(spec, 1, b));
  }
}

TEST_CASE("unstable root") {
  auto spec = oracle::reference_spec();
  Real r = unstable_root(spec);
  CHECK(std::abs(characteristic_value(spec, 1, r) - 1) <= 1e-10L);
  Real mine = bisect_root([](Real l) { return 4.0L / 3 * reference_transform(l); }, 0, 5);
  CHECK(std::abs(r - mine) < 1e-10L);
  CHECK(std::abs(r - oracle::kReferenceRoot) < 1e-10L);

  auto tail = oracle::tail_reference_spec();
  Real rt = unstable_root(tail);
  Real mt = bisect_root([](Real l) { return 4.0L / 3 * 0.5L * std::exp(-l) / (l + 0.5L); }, 0, 5);
  CHECK(std::abs(rt - mt) < 1e-10L);
  CHECK(std::abs(rt - oracle::kTailReferenceRoot) < 1e-10L);
}

TEST_CASE("classification of the three equilibria") {
  auto spec = oracle::reference_spec();
  CHECK(classify_stability(spec, 0) == Stability::Stable);
  CHECK(classify_stability(spec, 1) == Stability::Unstable);
  CHECK(classify_stability(spec, 2) == Stability::Stable);
  auto rows = stability_table(spec);
  REQUIRE(rows.size() == 3);
  CHECK(std::isnan(rows[0].root));
  CHECK(std::abs(rows[1].root - oracle::kReferenceRoot) < 1e-10L);
  CHECK(std::isnan(rows[2].root));
  CHECK(std::abs(rows[1].slope - 4.0L / 3) < 1e-15L);
}

TEST_CASE("the root shrinks as the two positive equilibria merge") {
  Real prev = 1;
  for (Real eps : {0.5L, 0.1L, 0.01L, 0.001L}) {
    // kappa1 = 1, kappa2 = 1 + eps, so f'(kappa1) = 2 kappa2 / (kappa1 + kappa2)
    ModelSpec spec(MortalityRate::constant(0.5L), BirthRate::compact({{1, 3, oracle::reference_c()}}),
                   BirthFunction::hill(2 + eps, 1 + eps));
    CHECK(std::abs(spec.f().derivative(1) - 2 * (1 + eps) / (2 + eps)) < 1e-15L);
    Real r = unstable_root(spec);
    CHECK(r > 0);
    CHECK(r < prev);
    prev = r;
  }
  CHECK(prev < 1e-3L);
}

TEST_CASE("perturbations of kappa1 grow at the predicted rate") {
  auto spec = oracle::reference_spec();
  Real h = spec.default_step();
  auto u0 = InitialDistribution::equilibrium(spec, 1) + InitialDistribution::step(0, 3, 1e-6L);
  auto tr = solve_b(spec, u0, 60, h);
  // least-squares slope of log(b - kappa1) on [20, 50]
  Real sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    if (tr.t[i] < 20 || tr.t[i] > 50) continue;
    Real d = tr.b[i] - spec.kappa1();
    REQUIRE(d > 0);
    Real x = tr.t[i], y = std::log(d);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++n;
  }
  Real slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(std::abs(slope / oracle::kReferenceRoot - 1) < 0.2L);
}
