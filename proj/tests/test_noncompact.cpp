#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "gmlab/noncompact.hpp"
#include "oracles.hpp"

using namespace gm;

namespace {

CoupledOptions loose() {
  CoupledOptions o;
  o.require_compatible = false;
  return o;
}

Real max_abs_dev(const std::vector<Real>& v, Real target) {
  Real d = 0;
  for (Real x : v) d = std::max(d, std::abs(x - target));
  return d;
}

// nonzero birth rate before the switch age, normalized
ModelSpec interior_spec() {
  auto mu = MortalityRate::constant(0.5L);
  auto raw = BirthRate::eventually_constant({{0.25L, 0.75L, 0.4L}}, 1, 0.6L);
  return ModelSpec(mu, normalize_birth_rate(raw, mu), BirthFunction::hill(3, 2));
}

}  // namespace

TEST_CASE("coupled equilibria") {
  auto spec = oracle::tail_reference_spec();
  CHECK(std::abs(survival_to_switch(spec) - std::exp(-0.5L)) < 1e-18L);
  auto eq = coupled_equilibria(spec);
  CHECK(eq[0].first == 0);
  CHECK(eq[0].second == 0);
  CHECK(std::abs(eq[1].first - oracle::kCoupledI1) < 1e-10L);
  CHECK(std::abs(eq[1].second - 1) < 1e-15L);
  CHECK(std::abs(eq[2].first - 2 * oracle::kCoupledI1) < 1e-10L);
  CHECK(std::abs(eq[2].second - 2) < 1e-15L);

  Real h = spec.default_step();
  for (const auto& [I, b] : eq) {
    auto st = coupled_state(spec, h, I, b);
    CHECK(coupled_residual(spec, st) < 1e-14L);
    auto tr = solve_coupled(spec, st, 100);
    CHECK(max_abs_dev(tr.I, I) < 1e-10L);
    CHECK(max_abs_dev(tr.b, b) < 10 * kFixedPointTol);
  }
}

TEST_CASE("argument checks") {
  auto compact = oracle::reference_spec();
  CHECK_THROWS_AS(survival_to_switch(compact), Error);
  CHECK_THROWS_AS(coupled_equilibria(compact), Error);
  auto spec = oracle::tail_reference_spec();
  // 0.3 does not divide a0 = 1
  CHECK_THROWS_AS(coupled_state(spec, 0.3L, 0, 0), Error);
  CHECK_THROWS_AS(coupled_state(spec, 0.125L, -1, 0), Error);

  auto st = coupled_state(spec, 0.125L, 0.3L, 1.7L);
  CHECK(coupled_residual(spec, st) > 0.1L);
  try {
    solve_coupled(spec, st, 5);
    FAIL("expected an incompatible state");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IncompatibleHistory);
  }
  CHECK_NOTHROW(solve_coupled(spec, st, 5, loose()));
}

TEST_CASE("I is integrated exactly over the first block") {
  // on [0, a0] the delayed input is the constant history
  auto spec = oracle::tail_reference_spec();
  Real alpha = 0.3L, phi = 1.7L, c0 = std::exp(-0.5L), mu = 0.5L;
  auto tr = solve_coupled(spec, coupled_state(spec, 0.0625L, alpha, phi), 1, loose());
  for (std::size_t n = 0; n < tr.size(); ++n) {
    Real t = tr.t[n];
    Real exact = std::exp(-mu * t) * alpha + c0 * phi * (1 - std::exp(-mu * t)) / mu;
    CHECK(std::abs(tr.I[n] - exact) < 1e-15L);
  }
}

TEST_CASE("zero state and the fates off the equilibria") {
  auto spec = oracle::tail_reference_spec();
  Real h = spec.default_step();
  auto z = solve_coupled(spec, coupled_state(spec, h, 0, 0), 50);
  CHECK(max_abs_dev(z.b, 0) == 0);
  CHECK(max_abs_dev(z.I, 0) == 0);
  Real c0 = survival_to_switch(spec);
  auto up = coupled_fate(spec, coupled_state(spec, h, 1.01L * c0 * 2, 1.01L), 200);
  auto down = coupled_fate(spec, coupled_state(spec, h, 0.99L * c0 * 2, 0.99L), 200);
  CHECK(up.verdict == Verdict::Persistent);
  CHECK(down.verdict == Verdict::Extinct);
  // without the trap the trajectories settle on kappa2 and 0
  auto far = solve_coupled(spec, coupled_state(spec, h, 1.01L * c0 * 2, 1.01L), 300, loose());
  CHECK(std::abs(far.b.back() - 2) < 1e-3L);
  CHECK(std::abs(far.I.back() - 2 * oracle::kCoupledI1) < 1e-3L);
}

TEST_CASE("comparison and boundedness") {
  auto spec = oracle::tail_reference_spec();
  Real h = spec.default_step();
  Real c0 = survival_to_switch(spec);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 3);
  for (int i = 0; i < 8; ++i) {
    Real a = u(rng), p = u(rng);
    Real a2 = a + u(rng) / 3, p2 = p + u(rng) / 3;
    auto lo = solve_coupled(spec, coupled_state(spec, h, a, p), 60, loose());
    auto hi = solve_coupled(spec, coupled_state(spec, h, a2, p2), 60, loose());
    Real worst_b = 0, worst_I = 0, max_b = 0;
    for (std::size_t n = 0; n < lo.size(); ++n) {
      worst_b = std::max(worst_b, lo.b[n] - hi.b[n]);
      worst_I = std::max(worst_I, lo.I[n] - hi.I[n]);
      max_b = std::max(max_b, hi.b[n]);
    }
    CHECK(worst_b <= kFixedPointTol);
    CHECK(worst_I <= kFixedPointTol);
    Real bound = std::max({a2, c0 * std::max(max_b, p2) / 0.5L});
    for (Real I : hi.I) CHECK(I <= bound * (1 + 1e-12L));
  }
}

TEST_CASE("full and coupled routes agree") {
  for (const auto& spec : {oracle::tail_reference_spec(), interior_spec()}) {
    Real h = spec.default_step();
    auto u0 = InitialDistribution::step(0, 2, 1.2L);
    auto r = equivalence_check(spec, u0, 20, h);
    CHECK(r.max_b_dev <= 5 * (h * h + kFixedPointTol));
    CHECK(r.max_I_dev <= 5 * (h * h + kFixedPointTol));
    auto eq = equivalence_check(spec, InitialDistribution::equilibrium(spec, 2), 20, h);
    CHECK(eq.max_b_dev < 1e-10L);
    auto zero = equivalence_check(spec, InitialDistribution(), 10, h);
    CHECK(zero.max_b_dev == 0);
  }
  // a finer coupled grid than the full one
  auto spec = oracle::tail_reference_spec();
  Real h = spec.default_step();
  auto r = equivalence_check(spec, InitialDistribution::step(0, 2, 1.2L), 10, h, h / 2);
  CHECK(r.max_b_dev <= 5 * (h * h + kFixedPointTol));
}

TEST_CASE("threshold along the equilibrium ray") {
  for (const auto& spec : {oracle::tail_reference_spec(), interior_spec()}) {
    auto r = coupled_threshold(spec, equilibrium_ray(spec), 1e-3L, 200, 0);
    REQUIRE(r.kind == ThresholdKind::Bracket);
    CHECK(r.lo <= 1);
    CHECK(r.hi >= 1);
    CHECK(r.width() <= 1e-3L);
  }
}
