#include "gmlab/threshold.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "gmlab/characteristics.hpp"

namespace gm {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Extinct: return "extinct";
    case Verdict::Persistent: return "persistent";
    default: return "undecided";
  }
}

namespace {

const PiecewiseConstant kOne(1);
const PiecewiseConstant kZero(0);

void fill_crossings(FateReport& r, const Trajectory& traj, Real k1, Real tol) {
  for (std::size_t n = 0; n < traj.size(); ++n) {
    if (r.first_above < 0 && traj.b[n] > k1 + tol) r.first_above = traj.t[n];
    if (r.first_below < 0 && traj.b[n] < k1 - tol) r.first_below = traj.t[n];
  }
}

Verdict verdict_from(Real lo, Real hi, Real k1, Real tol) {
  if (hi < k1 - tol) return Verdict::Extinct;
  if (lo > k1 + tol) return Verdict::Persistent;
  return Verdict::Undecided;
}

FateReport classify_once(const ModelSpec& spec, const InitialDistribution& u0, Real T, Real step, bool use_trap) {
  Real k1 = spec.kappa1(), tol = fate_tol(spec);
  SolveOptions so;
  std::size_t window = 0;
  bool trap = use_trap && spec.beta().compact_support();
  std::size_t run_above = 0, run_below = 0;
  int trapped = 0;  // +1 persistent, -1 extinct
  if (trap) {
    window = kernel_weights(spec, step).head_cells();
    // Once b has stayed on one side of the band for a whole memory window
    // (and t >= a*, so u0 no longer enters), comparison with the constant
    // history at the band edge decides the fate.
    so.stop = [&](std::span<const Real> b, std::size_t n) {
      Real v = b[n];
      run_above = v > k1 + tol ? run_above + 1 : 0;
      run_below = v < k1 - tol ? run_below + 1 : 0;
      if (n < window) return false;
      if (run_above > window) trapped = 1;
      if (run_below > window) trapped = -1;
      return trapped != 0;
    };
  }
  Trajectory traj = solve_b(spec, u0, T, step, so);
  FateReport r;
  r.horizon = traj.horizon();
  fill_crossings(r, traj, k1, tol);
  std::size_t from = trapped ? traj.size() - 1 - window : traj.trailing_begin();
  auto first = traj.b.begin() + static_cast<long>(from);
  r.trailing_min = *std::min_element(first, traj.b.end());
  r.trailing_max = *std::max_element(first, traj.b.end());
  r.trapped = trapped != 0;
  r.verdict = verdict_from(r.trailing_min, r.trailing_max, k1, tol);
  return r;
}

}  // namespace

FateReport fate_of(const ModelSpec& spec, const Trajectory& traj) {
  Real k1 = spec.kappa1(), tol = fate_tol(spec);
  FateReport r;
  r.horizon = traj.horizon();
  fill_crossings(r, traj, k1, tol);
  auto first = traj.b.begin() + static_cast<long>(traj.trailing_begin());
  r.trailing_min = *std::min_element(first, traj.b.end());
  r.trailing_max = *std::max_element(first, traj.b.end());
  r.verdict = verdict_from(r.trailing_min, r.trailing_max, k1, tol);
  return r;
}

FateReport classify_fate(const ModelSpec& spec, const InitialDistribution& u0, const FateOptions& opt) {
  Real step = opt.step > 0 ? opt.step : spec.default_step();
  FateReport r = classify_once(spec, u0, opt.T, step, opt.use_trap);
  if (opt.confirm_half_step && r.verdict != Verdict::Undecided) {
    FateReport fine = classify_once(spec, u0, opt.T, step / 2, opt.use_trap);
    if (fine.verdict != r.verdict) r.verdict = Verdict::Undecided;
    r.horizon = std::max(r.horizon, fine.horizon);
  }
  return r;
}

MonotoneFamily MonotoneFamily::scaling(const ModelSpec& spec, InitialDistribution base) {
  Real a_star = spec.beta().a_star();
  Real mass = base.transported_integral(kOne, kZero, 0, 0, a_star);
  if (!(mass > 0))
    fail(ErrorCode::InvalidArgument, "family profile must carry mass on ages below the maximal reproductive age");
  return MonotoneFamily([b = std::move(base)](Real l) { return b.scaled(l); }, "scaling");
}

MonotoneFamily MonotoneFamily::custom(std::function<InitialDistribution(Real)> rule, std::string label) {
  return MonotoneFamily(std::move(rule), std::move(label));
}

void check_monotone(std::vector<FateLogEntry> log) {
  Real max_extinct = -kInf, min_persistent = kInf;
  for (const auto& e : log) {
    if (e.verdict == Verdict::Extinct) max_extinct = std::max(max_extinct, e.lambda);
    if (e.verdict == Verdict::Persistent) min_persistent = std::min(min_persistent, e.lambda);
  }
  if (max_extinct > min_persistent)
    fail(ErrorCode::ComparisonViolation, "comparison violation: extinct fate at lambda = " +
                                             std::to_string(static_cast<double>(max_extinct)) +
                                             " above persistent fate at lambda = " +
                                             std::to_string(static_cast<double>(min_persistent)) +
                                             " (numerical fault)");
}

int count_inversions(std::vector<FateLogEntry> log) {
  std::stable_sort(log.begin(), log.end(), [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
  int bad = 0;
  for (std::size_t i = 0; i < log.size(); ++i)
    for (std::size_t j = i + 1; j < log.size(); ++j)
      if (log[j].lambda > log[i].lambda && static_cast<int>(log[i].verdict) > static_cast<int>(log[j].verdict)) ++bad;
  return bad;
}

ThresholdResult bisect_threshold(const FateFn& fate, Real width_tol, Real T) {
  require(width_tol > 0, "bracket width tolerance must be positive");
  ThresholdResult res;
  auto probe = [&](Real lambda) {
    FateReport r = fate(lambda, T);
    res.log.push_back({lambda, r.verdict, r.horizon, r.trailing_min, r.trailing_max});
    return r.verdict;
  };

  Real lo = 0, hi = kInf;
  for (Real lambda = 1;; lambda *= 2) {
    if (lambda > std::ldexp(1.0L, 20)) {
      res.kind = ThresholdKind::AllExtinct;
      res.lo = lo;
      res.hi = kInf;
      res.final_horizon = T;
      check_monotone(res.log);
      return res;
    }
    Verdict v = probe(lambda);
    if (v == Verdict::Persistent) {
      hi = lambda;
      break;
    }
    if (v == Verdict::Extinct) lo = lambda;
  }

  auto place = [&](Real x, Verdict v) {
    if (v == Verdict::Extinct && x > lo) {
      lo = x;
      return true;
    }
    if (v == Verdict::Persistent && x < hi) {
      hi = x;
      return true;
    }
    return false;
  };

  while (hi - lo > width_tol) {
    Real mid = lo + (hi - lo) / 2;
    Verdict v = probe(mid);
    if (place(mid, v)) continue;
    Real quarter = (hi - lo) / 4;
    Real a = mid - quarter, b = mid + quarter;
    Verdict va = probe(a), vb = probe(b);
    bool moved = place(a, va);
    moved = place(b, vb) || moved;
    if (lo >= hi) break;  // reported by the monotonicity check below
    if (moved) continue;
    if (!res.horizon_doubled) {
      T *= 2;
      res.horizon_doubled = true;
      continue;
    }
    res.accepted_undecided = true;
    break;
  }
  check_monotone(res.log);
  res.lo = lo;
  res.hi = hi;
  res.final_horizon = T;
  return res;
}

ThresholdResult find_threshold(const ModelSpec& spec, const MonotoneFamily& family, Real width_tol,
                               const FateOptions& opt) {
  FateFn fate = [&](Real lambda, Real T) {
    FateOptions o = opt;
    o.T = T;
    return classify_fate(spec, family.at(lambda), o);
  };
  return bisect_threshold(fate, width_tol, opt.T);
}

HoverReport threshold_diagnostics(const ModelSpec& spec, const MonotoneFamily& family, Real lambda, Real T_long,
                                  Real step, Real every) {
  if (step <= 0) step = spec.default_step();
  require(every > 0, "sampling interval must be positive");
  HoverReport h;
  h.lambda = lambda;
  InitialDistribution u0 = family.at(lambda);
  h.trajectory = solve_b(spec, u0, T_long, step);
  const Trajectory& tr = h.trajectory;
  h.horizon = tr.horizon();
  Real k1 = spec.kappa1(), k2 = spec.kappa2();
  h.band_lo = 0.1L * k1;
  h.band_hi = k2 - 0.1L * k1;
  h.transient = spec.beta().compact_support() ? spec.beta().a_star() : spec.beta().switch_age();

  Real delta = kInf;
  for (std::size_t n = 0; n < tr.size(); ++n) {
    if (tr.t[n] < h.transient) continue;
    Real v = tr.b[n];
    if (v < h.band_lo || v > h.band_hi) {
      h.exit_time = tr.t[n];
      break;
    }
    delta = std::min({delta, v, k2 - v});
  }
  h.hover_duration = (h.exit_time < 0 ? h.horizon : h.exit_time) - h.transient;
  h.delta_est = std::isfinite(delta) ? delta : 0;
  auto first = tr.b.begin() + static_cast<long>(tr.trailing_begin());
  h.trailing_min = *std::min_element(first, tr.b.end());
  h.trailing_max = *std::max_element(first, tr.b.end());

  auto grid = make_age_grid(spec.mu(), step,
                            static_cast<std::size_t>(std::ceil(truncation_age(spec, u0, h.horizon) / step)));
  h.min_l1 = h.min_dist0 = h.min_dist2 = kInf;
  h.max_l1 = 0;
  auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(every / step)));
  for (std::size_t n = 0; n < tr.size(); n += stride) {
    AgeDensity d = reconstruct(spec, u0, tr, tr.t[n], grid);
    Real l1 = l1_norm(d);
    Real d0 = l1_distance_to_equilibrium(d, spec, 0);
    Real d1 = l1_distance_to_equilibrium(d, spec, 1);
    Real d2 = l1_distance_to_equilibrium(d, spec, 2);
    h.sample_t.push_back(tr.t[n]);
    h.l1.push_back(l1);
    h.dist0.push_back(d0);
    h.dist1.push_back(d1);
    h.dist2.push_back(d2);
    bool hovering = tr.t[n] >= h.transient && (h.exit_time < 0 || tr.t[n] < h.exit_time);
    if (hovering) {
      h.min_l1 = std::min(h.min_l1, l1);
      h.max_l1 = std::max(h.max_l1, l1);
      h.min_dist0 = std::min(h.min_dist0, d0);
      h.min_dist2 = std::min(h.min_dist2, d2);
    }
  }
  if (!std::isfinite(h.min_l1)) h.min_l1 = h.min_dist0 = h.min_dist2 = 0;
  AgeDensity last = reconstruct(spec, u0, tr, tr.horizon(), grid);
  h.final_dist2 = l1_distance_to_equilibrium(last, spec, 2);
  return h;
}

std::vector<SweepRow> sweep(const ModelSpec& spec, const MonotoneFamily& family, std::vector<Real> lambdas,
                            const FateOptions& opt, unsigned threads) {
  std::sort(lambdas.begin(), lambdas.end());
  std::vector<SweepRow> rows(lambdas.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, lambdas.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < lambdas.size();) {
      try {
        rows[i] = {lambdas[i], classify_fate(spec, family.at(lambdas[i]), opt)};
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return rows;
}

}  // namespace gm
