#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gmlab/threshold.hpp"
#include "oracles.hpp"

using namespace gm;

namespace {

FateReport verdict(Verdict v, Real T) {
  FateReport r;
  r.verdict = v;
  r.horizon = T;
  return r;
}

// a step fate with an undecided band of half-width `band` around `at`
FateFn synthetic(Real at, Real band) {
  return [=](Real l, Real T) {
    if (l < at - band) return verdict(Verdict::Extinct, T);
    if (l > at + band) return verdict(Verdict::Persistent, T);
    return verdict(Verdict::Undecided, T);
  };
}

}  // namespace

TEST_CASE("bisection on synthetic fates") {
  auto r = bisect_threshold(synthetic(0.3L, 0), 1e-6L, 10);
  CHECK(r.kind == ThresholdKind::Bracket);
  CHECK(r.lo <= 0.3L);
  CHECK(r.hi >= 0.3L);
  CHECK(r.width() <= 1e-6L);
  CHECK_FALSE(r.accepted_undecided);

  // threshold above the first doubling probe
  auto big = bisect_threshold(synthetic(37.5L, 0), 1e-3L, 10);
  CHECK(big.lo <= 37.5L);
  CHECK(big.hi >= 37.5L);

  // an undecided band wider than the tolerance stops the bisection
  auto und = bisect_threshold(synthetic(0.3L, 1e-3L), 1e-6L, 10);
  CHECK(und.accepted_undecided);
  CHECK(und.horizon_doubled);
  CHECK(und.final_horizon == 20);
  CHECK(und.lo <= 0.3L - 1e-3L);
  CHECK(und.hi >= 0.3L + 1e-3L);

  auto none = bisect_threshold([](Real, Real T) { return verdict(Verdict::Extinct, T); }, 1e-3L, 10);
  CHECK(none.kind == ThresholdKind::AllExtinct);
  CHECK(std::isinf(none.hi));
  CHECK(none.lo == std::ldexp(1.0L, 20));
}

TEST_CASE("horizon doubling resolves slow verdicts") {
  // undecided near the threshold until the horizon reaches 20
  FateFn slow = [](Real l, Real T) {
    if (T < 20 && std::abs(l - 0.3L) < 0.01L) return verdict(Verdict::Undecided, T);
    return verdict(l < 0.3L ? Verdict::Extinct : Verdict::Persistent, T);
  };
  auto r = bisect_threshold(slow, 1e-5L, 10);
  CHECK(r.horizon_doubled);
  CHECK_FALSE(r.accepted_undecided);
  CHECK(r.width() <= 1e-5L);
  CHECK(r.lo <= 0.3L);
  CHECK(r.hi >= 0.3L);
}

TEST_CASE("ordering checks") {
  std::vector<FateLogEntry> good = {{0.1L, Verdict::Extinct, 1, 0, 0},
                                    {0.2L, Verdict::Undecided, 1, 0, 0},
                                    {0.4L, Verdict::Persistent, 1, 0, 0}};
  CHECK_NOTHROW(check_monotone(good));
  CHECK(count_inversions(good) == 0);
  auto bad = good;
  bad.push_back({0.6L, Verdict::Extinct, 1, 0, 0});
  try {
    check_monotone(bad);
    FAIL("expected a comparison violation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ComparisonViolation);
  }
  // both earlier entries rank above the extinct one
  CHECK(count_inversions(bad) == 2);
  // undecided first midpoint, then probes on either side disagree with the order
  FateFn broken = [](Real l, Real T) {
    if (l >= 1 || l < 0.45L) return verdict(Verdict::Persistent, T);
    if (l <= 0.55L) return verdict(Verdict::Undecided, T);
    return verdict(Verdict::Extinct, T);
  };
  CHECK_THROWS_AS(bisect_threshold(broken, 1e-3L, 10), Error);
}

TEST_CASE("fates of the reference model") {
  auto spec = oracle::reference_spec();
  FateOptions opt;
  CHECK(classify_fate(spec, InitialDistribution::step(0, 3, 5), opt).verdict == Verdict::Persistent);
  CHECK(classify_fate(spec, InitialDistribution::step(0, 3, 0.01L), opt).verdict == Verdict::Extinct);
  CHECK(classify_fate(spec, InitialDistribution(), opt).verdict == Verdict::Extinct);
  auto eq2 = classify_fate(spec, InitialDistribution::equilibrium(spec, 2), opt);
  CHECK(eq2.verdict == Verdict::Persistent);
  // kappa1 itself never settles
  opt.use_trap = false;
  auto eq1 = classify_fate(spec, InitialDistribution::equilibrium(spec, 1), opt);
  CHECK(eq1.verdict == Verdict::Undecided);
  CHECK(std::abs(eq1.trailing_min - spec.kappa1()) < 1e-6L);
}

TEST_CASE("threshold of a step profile") {
  auto spec = oracle::reference_spec();
  auto psi = InitialDistribution::step(0, 3, 1);
  FateOptions opt;
  auto r = find_threshold(spec, MonotoneFamily::scaling(spec, psi), 1e-3L, opt);
  REQUIRE(r.kind == ThresholdKind::Bracket);
  CHECK(r.width() <= 1e-3L);
  CHECK(classify_fate(spec, psi.scaled(r.lo), opt).verdict == Verdict::Extinct);
  CHECK(classify_fate(spec, psi.scaled(r.hi), opt).verdict == Verdict::Persistent);
  CHECK(count_inversions(r.log) == 0);

  // doubling the profile halves the threshold
  auto r2 = find_threshold(spec, MonotoneFamily::scaling(spec, psi.scaled(2)), 1e-3L, opt);
  CHECK(std::abs(r2.estimate() - r.estimate() / 2) <= 1e-3L);

  // the kappa2 equilibrium persists at lambda = 1, so its threshold is below 1
  auto r3 = find_threshold(spec, MonotoneFamily::scaling(spec, InitialDistribution::equilibrium(spec, 2)), 1e-3L,
                           opt);
  CHECK(r3.estimate() <= 1);
}

TEST_CASE("profiles without reproductive mass are rejected") {
  auto spec = oracle::reference_spec();
  CHECK_THROWS_AS(MonotoneFamily::scaling(spec, InitialDistribution::step(4, 5, 1)), Error);
  CHECK_THROWS_AS(MonotoneFamily::scaling(spec, InitialDistribution()), Error);
  CHECK_NOTHROW(MonotoneFamily::scaling(spec, InitialDistribution::step(2.5L, 5, 1)));
}

TEST_CASE("sweeps are monotone and thread-independent") {
  auto spec = oracle::reference_spec();
  auto fam = MonotoneFamily::scaling(spec, InitialDistribution::step(0, 3, 1));
  std::vector<Real> lambdas;
  for (int i = 0; i < 20; ++i) lambdas.push_back(0.1L * (i + 1));
  FateOptions opt;
  opt.confirm_half_step = false;
  auto a = sweep(spec, fam, lambdas, opt, 1);
  auto b = sweep(spec, fam, lambdas, opt, 4);
  REQUIRE(a.size() == lambdas.size());
  std::vector<FateLogEntry> log;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].lambda == b[i].lambda);
    CHECK(a[i].fate.verdict == b[i].fate.verdict);
    CHECK(a[i].fate.trailing_max == b[i].fate.trailing_max);
    log.push_back({a[i].lambda, a[i].fate.verdict, 0, 0, 0});
  }
  CHECK(count_inversions(log) == 0);
  CHECK(a.front().fate.verdict == Verdict::Extinct);
  CHECK(a.back().fate.verdict == Verdict::Persistent);
}

TEST_CASE("long runs near the threshold hover around kappa1") {
  auto spec = oracle::reference_spec();
  auto fam = MonotoneFamily::scaling(spec, InitialDistribution::step(0, 3, 1));
  FateOptions opt;
  opt.confirm_half_step = false;
  auto r = find_threshold(spec, fam, 1e-5L, opt);
  auto hv = threshold_diagnostics(spec, fam, r.estimate(), 300, spec.default_step());
  CHECK(hv.hover_duration > 50);
  CHECK(hv.delta_est > 0);
  // the kappa1 profile hovers for the whole run
  auto eq = MonotoneFamily::custom([&](Real l) { return InitialDistribution::equilibrium(spec, 1).scaled(l); },
                                   "kappa1");
  auto he = threshold_diagnostics(spec, eq, 1, 100, spec.default_step());
  CHECK(he.exit_time < 0);
}
