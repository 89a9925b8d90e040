#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gmlab/delaycheck.hpp"
#include "oracles.hpp"

using namespace gm;

TEST_CASE("delay form of the tail model") {
  auto spec = oracle::tail_reference_spec();
  auto d = DelaySpec::from_model(spec);
  CHECK(d.tau() == 1);
  CHECK(d.mu() == 0.5L);
  CHECK(std::abs(d.gain() - 0.5L) < 1e-18L);
  auto eq = delay_equilibria(d, spec);
  REQUIRE(eq.size() == 3);
  CHECK(eq[0] == 0);
  CHECK(std::abs(eq[1] - 2) < 1e-15L);
  CHECK(std::abs(eq[2] - 4) < 1e-15L);
  CHECK(std::abs(d.model().kappa2() - spec.kappa2()) < 1e-15L);
}

TEST_CASE("rejected shapes") {
  CHECK_THROWS_AS(DelaySpec::from_model(oracle::reference_spec()), Error);
  auto mu = MortalityRate::constant(0.5L);
  auto interior = normalize_birth_rate(BirthRate::eventually_constant({{0.25L, 0.75L, 0.4L}}, 1, 0.6L), mu);
  CHECK_THROWS_AS(DelaySpec::from_model(ModelSpec(mu, interior, BirthFunction::hill(3, 2))), Error);
  // gain / mu must be one
  CHECK_THROWS_AS(DelaySpec(1, 0.5L, 1, BirthFunction::hill(3, 2)), Error);
  CHECK_NOTHROW(DelaySpec(0.5L * std::exp(0.5L), 0.5L, 1, BirthFunction::hill(3, 2)));
}

TEST_CASE("equilibria and zero are stationary") {
  auto spec = oracle::tail_reference_spec();
  auto d = DelaySpec::from_model(spec);
  Real h = 1.0L / 32;
  for (Real U : delay_equilibria(d, spec)) {
    auto tr = solve_delay(d, h, std::vector<Real>(33, U), 100);
    Real dev = 0;
    for (Real x : tr.U) dev = std::max(dev, std::abs(x - U));
    CHECK(dev <= 1e-8L);
  }
  CHECK_THROWS_AS(solve_delay(d, 0.3L, std::vector<Real>(4, 1), 10), Error);
}

TEST_CASE("RK4 against a closed form on the first interval") {
  // constant seed: U' = f(gain U0) - mu U on [tau, 2 tau] is linear with constant forcing
  auto spec = oracle::tail_reference_spec();
  auto d = DelaySpec::from_model(spec);
  Real h = 1.0L / 16, U0 = 1.3L;
  auto tr = solve_delay(d, h, std::vector<Real>(17, U0), 2);
  Real F = spec.f()(d.gain() * U0);
  for (std::size_t n = 16; n < tr.U.size(); ++n) {
    Real s = tr.t[n] - 1;
    Real exact = F / 0.5L + (U0 - F / 0.5L) * std::exp(-0.5L * s);
    CHECK(std::abs(tr.U[n] - exact) < 1e-8L);
  }
}

TEST_CASE("three routes to the total population") {
  auto spec = oracle::tail_reference_spec();
  auto eq = cross_validate(spec, InitialDistribution::equilibrium(spec, 2), 20, 1.0L / 16);
  CHECK(eq.max_delay_vs_characteristics < 1e-8L);
  CHECK(eq.max_characteristics_vs_coupled < 1e-8L);
  for (Real U : eq.U_delay) CHECK(std::abs(U - 4) < 1e-8L);

  auto zero = cross_validate(spec, InitialDistribution(), 10, 1.0L / 16);
  CHECK(zero.max_delay_vs_characteristics == 0);

  auto u0 = InitialDistribution::exponential(1.5L, 0.5L);
  auto a = cross_validate(spec, u0, 30, 1.0L / 16);
  auto b = cross_validate(spec, u0, 30, 1.0L / 32);
  Real ratio = a.max_delay_vs_characteristics / b.max_delay_vs_characteristics;
  CHECK(ratio >= 2.8L);
  CHECK(ratio <= 5.2L);
  CHECK(a.max_delay_vs_coupled < 1e-3L);
}
