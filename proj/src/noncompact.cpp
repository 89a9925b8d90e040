#include "gmlab/noncompact.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gmlab/characteristics.hpp"

namespace gm {

namespace {

std::string num(Real x) {
  std::ostringstream os;
  os.precision(10);
  os << static_cast<double>(x);
  return os.str();
}

void require_tail(const ModelSpec& spec) {
  if (spec.beta().compact_support())
    fail(ErrorCode::InvalidArgument, "the coupled system needs an eventually-constant birth rate");
}

// beta on [0, a0), zero beyond
PiecewiseConstant interior_beta(const ModelSpec& spec) {
  const PiecewiseConstant& p = spec.beta().profile();
  Real a0 = spec.beta().switch_age();
  if (a0 <= 0) return PiecewiseConstant(0);
  std::vector<Real> breaks, values;
  for (Real b : p.breaks()) {
    if (b >= a0) break;
    breaks.push_back(b);
  }
  Real lo = 0;
  for (Real b : breaks) {
    values.push_back(p(lo + (b - lo) / 2));
    lo = b;
  }
  values.push_back(p(lo + (a0 - lo) / 2));
  breaks.push_back(a0);
  values.push_back(0);
  return PiecewiseConstant(std::move(breaks), std::move(values));
}

std::size_t block_cells(const ModelSpec& spec, Real step) {
  Real a0 = spec.beta().switch_age();
  auto m = static_cast<std::size_t>(std::llround(a0 / step));
  if (std::abs(static_cast<Real>(m) * step - a0) > 1e-9L * std::max<Real>(1, a0))
    fail(ErrorCode::InvalidArgument, "coupled step " + num(step) + " must divide a0 = " + num(a0));
  return m;
}

// b on the coupled grid: j >= 0 computed, j < 0 from the history. At j = 0 the
// later end of a cell sees phi(0) and the earlier end b(0+).
struct Nodes {
  const std::vector<Real>& b;
  const HistoryFn& hist;

  Real later(long j) const {
    if (j > 0) return b[static_cast<std::size_t>(j)];
    return hist.at_lag(static_cast<std::size_t>(-j));
  }
  Real earlier(long j) const {
    if (j >= 0) return b[static_cast<std::size_t>(j)];
    return hist.at_lag(static_cast<std::size_t>(-j));
  }
};

Real memory(const KernelWeights& w, const Nodes& nd, long n) {
  Real s = 0;
  for (std::size_t k = 0; k < w.head_cells(); ++k) {
    auto kk = static_cast<long>(k);
    if (k > 0) s += w.head_later[k] * nd.later(n - kk);
    s += w.head_earlier[k] * nd.earlier(n - kk - 1);
  }
  return s;
}

struct Setup {
  Real c0, mu_inf, beta_inf, r, P, Q;
  std::size_t m;
  KernelWeights w;
};

// P and Q weight the earlier and later ends of b over one step of
// I' = -mu_inf I + c0 b(t - a0); exact for piecewise-linear b.
Setup make_setup(const ModelSpec& spec, Real step) {
  Setup s;
  s.mu_inf = spec.mu().tail_value();
  s.beta_inf = spec.beta().beta_inf();
  s.c0 = survival_to_switch(spec);
  s.m = block_cells(spec, step);
  s.r = std::exp(-s.mu_inf * step);
  Real m1 = detail::exp_moment1(s.mu_inf, step);
  s.P = m1 / step;
  s.Q = detail::exp_moment0(s.mu_inf, step) - m1 / step;
  s.w = kernel_weights(interior_beta(spec), spec.mu().rate(), step, s.m);
  return s;
}

Real b_at_zero(const ModelSpec& spec, const Setup& s, const CoupledState& st) {
  std::vector<Real> none{st.phi.at_lag(0)};
  Nodes nd{none, st.phi};
  Real mem = s.m > 0 ? s.w.head_later[0] * st.phi.at_lag(0) + memory(s.w, nd, 0) : 0;
  return spec.f()(mem + s.beta_inf * st.alpha);
}

}  // namespace

std::size_t CoupledTrajectory::trailing_begin() const {
  if (t.empty()) return 0;
  Real from = 0.75L * horizon();
  auto it = std::lower_bound(t.begin(), t.end(), from - 1e-12L);
  return static_cast<std::size_t>(it - t.begin());
}

Real survival_to_switch(const ModelSpec& spec) {
  require_tail(spec);
  return std::exp(-spec.mu().cumulative(spec.beta().switch_age()));
}

std::array<std::pair<Real, Real>, 3> coupled_equilibria(const ModelSpec& spec) {
  Real c0 = survival_to_switch(spec);
  Real mu = spec.mu().tail_value();
  return {{{0, 0}, {c0 * spec.kappa1() / mu, spec.kappa1()}, {c0 * spec.kappa2() / mu, spec.kappa2()}}};
}

CoupledState coupled_state(const ModelSpec& spec, Real step, Real alpha, Real phi_value) {
  require(alpha >= 0 && std::isfinite(alpha), "initial I must be finite and nonnegative");
  std::size_t m = block_cells(spec, step);
  return {alpha, HistoryFn::constant(step, m, phi_value)};
}

Real coupled_residual(const ModelSpec& spec, const CoupledState& state) {
  require_tail(spec);
  Setup s = make_setup(spec, state.phi.step());
  require(state.phi.cells() >= s.m, "history must cover [-a0, 0] on its grid");
  return std::abs(state.phi.at_lag(0) - b_at_zero(spec, s, state));
}

CoupledTrajectory solve_coupled(const ModelSpec& spec, const CoupledState& state, Real T,
                                const CoupledOptions& opt) {
  require_tail(spec);
  const HistoryFn& phi = state.phi;
  Real step = phi.step();
  std::size_t N = grid_nodes(spec, T, step);
  Setup s = make_setup(spec, step);
  require(phi.cells() >= s.m, "history must cover [-a0, 0] on its grid");
  require(state.alpha >= 0 && std::isfinite(state.alpha), "initial I must be finite and nonnegative");
  const BirthFunction& f = spec.f();

  CoupledTrajectory tr;
  tr.step = step;
  tr.c0 = s.c0;
  tr.t.reserve(N + 1);
  tr.I.reserve(N + 1);
  tr.b.reserve(N + 1);
  tr.t.push_back(0);
  tr.I.push_back(state.alpha);
  tr.b.push_back(b_at_zero(spec, s, state));
  tr.compatibility_residual = std::abs(tr.b[0] - phi.at_lag(0));
  if (opt.require_compatible && tr.compatibility_residual > opt.history_tol)
    fail(ErrorCode::IncompatibleHistory, "initial state outside the compatible set: residual " +
                                             num(tr.compatibility_residual) + " exceeds " + num(opt.history_tol));
  if (opt.stop && opt.stop(tr, 0)) {
    tr.stopped_early = N > 0;
    return tr;
  }

  auto m = static_cast<long>(s.m);
  // With a0 = 0 the I update sees b_n itself and joins the implicit solve.
  Real implicit_I = s.m == 0 ? s.c0 * s.Q : 0;
  Real w = s.m > 0 ? s.w.head_later[0] : 0;
  w += s.beta_inf * implicit_I;
  for (std::size_t n = 1; n <= N; ++n) {
    auto nn = static_cast<long>(n);
    Nodes nd{tr.b, phi};
    Real I_known = s.r * tr.I.back() + s.c0 * s.P * nd.earlier(nn - 1 - m);
    if (s.m > 0) I_known += s.c0 * s.Q * nd.later(nn - m);
    Real c = (s.m > 0 ? memory(s.w, nd, nn) : 0) + s.beta_inf * I_known;
    Real x = tr.b.back();
    bool ok = w == 0;
    if (ok) x = f(c);
    for (int it = 0; !ok && it < opt.max_iterations; ++it) {
      Real nx = f(c + w * x);
      ok = std::abs(nx - x) <= opt.fp_tol;
      x = nx;
    }
    if (!ok)
      fail(ErrorCode::Contraction, "fixed-point iteration failed to converge at t = " +
                                       num(step * static_cast<Real>(n)) + "; use a step below Delta_max = " +
                                       num(spec.max_step()));
    Real I = I_known + implicit_I * x;
    tr.max_b_residual = std::max(tr.max_b_residual, std::abs(x - f(c + w * x)));
    tr.t.push_back(step * static_cast<Real>(n));
    tr.I.push_back(I);
    tr.b.push_back(x);
    if (opt.stop && opt.stop(tr, n)) {
      tr.stopped_early = n < N;
      break;
    }
  }
  return tr;
}

EquivalenceReport equivalence_check(const ModelSpec& spec, const InitialDistribution& u0, Real T, Real step,
                                    Real coupled_step) {
  require_tail(spec);
  if (coupled_step <= 0) coupled_step = step;
  auto q = static_cast<std::size_t>(std::llround(step / coupled_step));
  require(q >= 1 && std::abs(static_cast<Real>(q) * coupled_step - step) <= 1e-12L * step,
          "coupled step must divide the full step");
  Real a0 = spec.beta().switch_age();
  std::size_t m = block_cells(spec, coupled_step);
  block_cells(spec, step);
  require(T > a0, "horizon must extend past a0");

  EquivalenceReport rep;
  rep.step_full = step;
  rep.step_coupled = coupled_step;

  // The coupled side starts at t = a0: b on [0, a0] from the age-structured
  // solution on the coupled grid, and I(a0) from the initial cohort.
  Trajectory seed = solve_b(spec, u0, a0 > 0 ? a0 : coupled_step, coupled_step);
  std::vector<Real> hist(seed.b.begin(), seed.b.begin() + static_cast<long>(m + 1));
  rep.I_seed = u0.transported_integral(PiecewiseConstant(1), spec.mu().rate(), a0);
  CoupledState st{rep.I_seed, HistoryFn(coupled_step, std::move(hist))};
  rep.seed_residual = coupled_residual(spec, st);
  CoupledOptions co;
  co.require_compatible = false;
  CoupledTrajectory ct = solve_coupled(spec, st, T - a0, co);

  Trajectory full = solve_b(spec, u0, T, step);
  std::size_t first = block_cells(spec, step);
  for (std::size_t n = first; n < full.size(); ++n) {
    std::size_t j = (n - first) * q;
    if (j >= ct.size()) break;
    Real I_full = mass_beyond(spec, u0, full, n, a0);
    rep.t.push_back(full.t[n]);
    rep.b_full.push_back(full.b[n]);
    rep.b_coupled.push_back(ct.b[j]);
    rep.I_full.push_back(I_full);
    rep.I_coupled.push_back(ct.I[j]);
    rep.max_b_dev = std::max(rep.max_b_dev, std::abs(full.b[n] - ct.b[j]));
    rep.max_I_dev = std::max(rep.max_I_dev, std::abs(I_full - ct.I[j]));
  }
  return rep;
}

namespace {

FateReport coupled_fate_once(const ModelSpec& spec, const CoupledState& state, Real T, bool use_trap) {
  Real k1 = spec.kappa1(), tol = fate_tol(spec);
  Real c0 = survival_to_switch(spec), mu = spec.mu().tail_value();
  Real I_hi = c0 * (k1 + tol) / mu, I_lo = c0 * (k1 - tol) / mu;
  std::size_t window = std::max<std::size_t>(1, block_cells(spec, state.phi.step()));
  std::size_t run_above = 0, run_below = 0;
  int trapped = 0;
  CoupledOptions co;
  co.require_compatible = false;
  if (use_trap) {
    // Once the whole b window and I sit on one side of the kappa1 pair,
    // comparison with the constant state at the band edge decides the fate.
    co.stop = [&](const CoupledTrajectory& tr, std::size_t n) {
      Real v = tr.b[n];
      run_above = v > k1 + tol ? run_above + 1 : 0;
      run_below = v < k1 - tol ? run_below + 1 : 0;
      if (n < window) return false;
      if (run_above > window && tr.I[n] >= I_hi) trapped = 1;
      if (run_below > window && tr.I[n] <= I_lo) trapped = -1;
      return trapped != 0;
    };
  }
  CoupledTrajectory tr = solve_coupled(spec, state, T, co);
  FateReport r;
  r.horizon = tr.horizon();
  for (std::size_t n = 0; n < tr.size(); ++n) {
    if (r.first_above < 0 && tr.b[n] > k1 + tol) r.first_above = tr.t[n];
    if (r.first_below < 0 && tr.b[n] < k1 - tol) r.first_below = tr.t[n];
  }
  std::size_t from = trapped ? tr.size() - 1 - std::min(window, tr.size() - 1) : tr.trailing_begin();
  auto first = tr.b.begin() + static_cast<long>(from);
  r.trailing_min = *std::min_element(first, tr.b.end());
  r.trailing_max = *std::max_element(first, tr.b.end());
  r.trapped = trapped != 0;
  if (r.trailing_max < k1 - tol)
    r.verdict = Verdict::Extinct;
  else if (r.trailing_min > k1 + tol)
    r.verdict = Verdict::Persistent;
  else
    r.verdict = Verdict::Undecided;
  return r;
}

// The same history on a grid of half the step, linearly interpolated.
CoupledState refine(const CoupledState& s) {
  const auto& v = s.phi.values();
  std::vector<Real> out;
  out.reserve(2 * v.size() - 1);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out.push_back((v[i - 1] + v[i]) / 2);
    out.push_back(v[i]);
  }
  return {s.alpha, HistoryFn(s.phi.step() / 2, std::move(out))};
}

}  // namespace

FateReport coupled_fate(const ModelSpec& spec, const CoupledState& state, Real T, bool use_trap,
                        bool confirm_half_step) {
  FateReport r = coupled_fate_once(spec, state, T, use_trap);
  if (confirm_half_step && r.verdict != Verdict::Undecided) {
    FateReport fine = coupled_fate_once(spec, refine(state), T, use_trap);
    if (fine.verdict != r.verdict) r.verdict = Verdict::Undecided;
    r.horizon = std::max(r.horizon, fine.horizon);
  }
  return r;
}

CoupledFamily equilibrium_ray(const ModelSpec& spec) {
  Real c0 = survival_to_switch(spec), mu = spec.mu().tail_value();
  return [&spec, c0, mu](Real lambda, Real step) { return coupled_state(spec, step, lambda * c0 / mu, lambda); };
}

ThresholdResult coupled_threshold(const ModelSpec& spec, const CoupledFamily& family, Real width_tol, Real T,
                                  Real step) {
  require_tail(spec);
  if (step <= 0) step = spec.default_step();
  block_cells(spec, step);
  FateFn fate = [&](Real lambda, Real horizon) { return coupled_fate(spec, family(lambda, step), horizon); };
  return bisect_threshold(fate, width_tol, T);
}

}  // namespace gm
