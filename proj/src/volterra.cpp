#include "gmlab/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gm {

namespace {

std::string num(Real x) {
  std::ostringstream os;
  os.precision(10);
  os << static_cast<double>(x);
  return os.str();
}

// Exact integrals of K against the two halves of the hat on cell [lo, lo + h].
std::pair<Real, Real> cell_weights(const PiecewiseConstant& beta, const PiecewiseConstant& mu, Real lo, Real h) {
  Real later = detail::integrate_weighted_linear(beta, mu, 0, lo, lo + h, 1, -1 / h);
  Real earlier = detail::integrate_weighted_linear(beta, mu, 0, lo, lo + h, 0, 1 / h);
  return {later, earlier};
}

std::size_t cells_to_cover(Real age, Real h) {
  Real r = age / h;
  auto c = static_cast<std::size_t>(std::ceil(r - 1e-9L));
  return c;
}

}  // namespace

Real KernelWeights::later(std::size_t k) const {
  if (k < head_cells()) return head_later[k];
  if (!geometric) return 0;
  return tail_later * std::pow(ratio, static_cast<Real>(k - tail_start));
}

Real KernelWeights::earlier(std::size_t k) const {
  if (k < head_cells()) return head_earlier[k];
  if (!geometric) return 0;
  return tail_earlier * std::pow(ratio, static_cast<Real>(k - tail_start));
}

KernelWeights kernel_weights(const PiecewiseConstant& beta, const PiecewiseConstant& mu, Real step,
                             std::size_t cells) {
  require(step > 0 && std::isfinite(step), "grid step must be positive");
  KernelWeights w;
  w.step = step;
  for (std::size_t k = 0; k < cells; ++k) {
    auto [l, e] = cell_weights(beta, mu, step * static_cast<Real>(k), step);
    w.head_later.push_back(l);
    w.head_earlier.push_back(e);
  }
  return w;
}

KernelWeights kernel_weights(const ModelSpec& spec, Real step) {
  const auto& beta = spec.beta();
  const auto& mu = spec.mu().rate();
  if (beta.compact_support())
    return kernel_weights(beta.profile(), mu, step, std::max<std::size_t>(1, cells_to_cover(beta.a_star(), step)));
  // Past max(a0, last mortality break) the kernel is a pure exponential, so
  // successive cells differ by the factor exp(-mu_inf h).
  Real flat_from = std::max(beta.switch_age(), spec.mu().last_break());
  std::size_t k0 = std::max<std::size_t>(1, cells_to_cover(flat_from, step));
  KernelWeights w = kernel_weights(beta.profile(), mu, step, k0);
  w.geometric = true;
  w.tail_start = k0;
  w.ratio = std::exp(-spec.mu().tail_value() * step);
  std::tie(w.tail_later, w.tail_earlier) = cell_weights(beta.profile(), mu, step * static_cast<Real>(k0), step);
  return w;
}

HistoryFn::HistoryFn(Real step, std::vector<Real> values) : step_(step), values_(std::move(values)) {
  require(step_ > 0 && std::isfinite(step_), "history step must be positive");
  require(!values_.empty(), "history needs at least the value at 0");
  for (Real v : values_) require(std::isfinite(v) && v >= 0, "history values must be finite and nonnegative");
}

HistoryFn HistoryFn::constant(Real step, std::size_t cells, Real value) {
  return HistoryFn(step, std::vector<Real>(cells + 1, value));
}

HistoryFn HistoryFn::scaled(Real factor) const {
  std::vector<Real> v = values_;
  for (Real& x : v) x *= factor;
  return HistoryFn(step_, std::move(v));
}

std::size_t Trajectory::trailing_begin() const {
  if (t.empty()) return 0;
  Real from = 0.75L * horizon();
  auto it = std::lower_bound(t.begin(), t.end(), from - 1e-12L);
  return static_cast<std::size_t>(it - t.begin());
}

std::size_t grid_nodes(const ModelSpec& spec, Real T, Real step) {
  require(std::isfinite(step) && step > 0, "grid step must be positive");
  require(std::isfinite(T) && T >= step, "horizon must be at least one step");
  Real dmax = spec.max_step();
  if (step > dmax * (1 + 1e-12L))
    fail(ErrorCode::Contraction, "step " + num(step) + " exceeds the contraction bound Delta_max = 1/(L beta_upper) = " +
                                     num(dmax));
  return cells_to_cover(T, step);
}

namespace {

// Node values for the memory sum. Index j >= 0 is the computed solution; j < 0
// reads the history. At j = 0 the later end of a cell sees b(0-) and the
// earlier end b(0+), which differ only for incompatible histories.
struct Nodes {
  std::span<const Real> b;
  const HistoryFn* hist = nullptr;
  Real zero_left = 0;

  Real later(long j) const {
    if (j > 0) return b[static_cast<std::size_t>(j)];
    if (j == 0) return hist ? zero_left : b[0];
    return hist->at_lag(static_cast<std::size_t>(-j));
  }
  Real earlier(long j) const {
    if (j >= 0) return b[static_cast<std::size_t>(j)];
    return hist->at_lag(static_cast<std::size_t>(-j));
  }
};

// Memory sum at node n over head cells, without the implicit later(0) b_n term.
Real head_memory(const KernelWeights& w, const Nodes& nd, std::size_t n, std::size_t cells) {
  Real s = 0;
  auto nn = static_cast<long>(n);
  for (std::size_t k = 0; k < cells; ++k) {
    auto kk = static_cast<long>(k);
    if (k > 0) s += w.head_later[k] * nd.later(nn - kk);
    s += w.head_earlier[k] * nd.earlier(nn - kk - 1);
  }
  return s;
}

// Geometric part T(n) from T(n-1); zero until n exceeds tail_start.
Real advance_tail(const KernelWeights& w, Real prev, std::span<const Real> b, std::size_t n) {
  if (!w.geometric || n <= w.tail_start) return 0;
  return w.ratio * prev + w.tail_later * b[n - w.tail_start] + w.tail_earlier * b[n - w.tail_start - 1];
}

Real initial_term(const ModelSpec& spec, const InitialDistribution& u0, Real t) {
  if (u0.is_zero()) return 0;
  if (spec.beta().compact_support() && t >= spec.beta().a_star()) return 0;
  return u0.transported_integral(spec.beta().profile(), spec.mu().rate(), t);
}

enum class Unknown { BirthFlux, Cumulative };

// Solves x = f(c + w x) (birth flux) or X = c + w f(X) (cumulative input).
std::pair<Real, int> implicit_node(const BirthFunction& f, Unknown kind, Real c, Real w, Real guess,
                                   const SolveOptions& opt, Real t, Real dmax) {
  auto map = [&](Real x) { return kind == Unknown::BirthFlux ? f(c + w * x) : c + w * f(x); };
  if (w == 0) return {map(0), 1};
  Real x = guess;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    Real nx = map(x);
    if (std::abs(nx - x) <= opt.fp_tol) return {nx, it};
    x = nx;
  }
  fail(ErrorCode::Contraction, "fixed-point iteration failed to converge at t = " + num(t) +
                                   "; use a step below Delta_max = " + num(dmax));
}

Trajectory march(const ModelSpec& spec, const InitialDistribution& u0, Real T, Real step, const SolveOptions& opt,
                 Unknown kind) {
  std::size_t N = grid_nodes(spec, T, step);
  KernelWeights w = kernel_weights(spec, step);
  const BirthFunction& f = spec.f();
  Trajectory tr;
  tr.step = step;
  tr.t.reserve(N + 1);
  tr.b.reserve(N + 1);
  Real R0 = w.later(0);
  Real dmax = spec.max_step();

  Real tail = 0;
  for (std::size_t n = 0; n <= N; ++n) {
    Real t = step * static_cast<Real>(n);
    tail = advance_tail(w, tail, tr.b, n);
    Real c = initial_term(spec, u0, t);
    if (n > 0) {
      Nodes nd{tr.b};
      c += head_memory(w, nd, n, std::min(n, w.head_cells())) + tail;
    }
    Real value;
    int iters;
    if (n == 0) {
      value = kind == Unknown::BirthFlux ? f(c) : c;
      iters = 0;
    } else {
      Real guess = kind == Unknown::BirthFlux ? tr.b.back() : tr.B.back();
      std::tie(value, iters) = implicit_node(f, kind, c, n > 0 ? R0 : 0, guess, opt, t, dmax);
    }
    tr.t.push_back(t);
    if (kind == Unknown::BirthFlux) {
      tr.b.push_back(value);
    } else {
      tr.B.push_back(value);
      tr.b.push_back(f(value));
    }
    tr.max_iterations = std::max(tr.max_iterations, iters);
    tr.total_iterations += iters;
    if (opt.stop && opt.stop(tr.b, n)) {
      tr.stopped_early = n < N;
      break;
    }
  }
  return tr;
}

}  // namespace

Trajectory solve_b(const ModelSpec& spec, const InitialDistribution& u0, Real T, Real step, const SolveOptions& opt) {
  return march(spec, u0, T, step, opt, Unknown::BirthFlux);
}

Trajectory solve_B(const ModelSpec& spec, const InitialDistribution& u0, Real T, Real step, const SolveOptions& opt) {
  return march(spec, u0, T, step, opt, Unknown::Cumulative);
}

namespace {

void require_history_fits(const ModelSpec& spec, const HistoryFn& phi, const KernelWeights& w) {
  if (!spec.beta().compact_support())
    fail(ErrorCode::InvalidArgument, "history form needs a compactly supported birth rate");
  require(phi.cells() >= w.head_cells(), "history must cover [-a*, 0] on its grid");
}

}  // namespace

Real compatibility_residual(const ModelSpec& spec, const HistoryFn& phi) {
  KernelWeights w = kernel_weights(spec, phi.step());
  require_history_fits(spec, phi, w);
  std::vector<Real> none{phi.at_lag(0)};
  Nodes nd{none, &phi, phi.at_lag(0)};
  Real mem = w.head_later[0] * phi.at_lag(0) + head_memory(w, nd, 0, w.head_cells());
  return std::abs(phi.at_lag(0) - spec.f()(mem));
}

Trajectory solve_from_history(const ModelSpec& spec, const HistoryFn& phi, Real T, const SolveOptions& opt,
                              bool require_compatible, Real history_tol) {
  Real step = phi.step();
  std::size_t N = grid_nodes(spec, T, step);
  KernelWeights w = kernel_weights(spec, step);
  require_history_fits(spec, phi, w);
  const BirthFunction& f = spec.f();

  Trajectory tr;
  tr.step = step;
  tr.b_zero_left = phi.at_lag(0);
  // b(0+) from the history alone
  {
    std::vector<Real> none{phi.at_lag(0)};
    Nodes nd{none, &phi, phi.at_lag(0)};
    Real mem = w.head_later[0] * phi.at_lag(0) + head_memory(w, nd, 0, w.head_cells());
    tr.b.push_back(f(mem));
    tr.t.push_back(0);
  }
  tr.compatibility_residual = std::abs(tr.b[0] - phi.at_lag(0));
  if (require_compatible && tr.compatibility_residual > history_tol)
    fail(ErrorCode::IncompatibleHistory, "incompatible history (discontinuity at 0): residual " +
                                             num(tr.compatibility_residual) + " exceeds " + num(history_tol));
  if (opt.stop && opt.stop(tr.b, 0)) {
    tr.stopped_early = N > 0;
    return tr;
  }
  Real R0 = w.later(0);
  for (std::size_t n = 1; n <= N; ++n) {
    Real t = step * static_cast<Real>(n);
    Nodes nd{tr.b, &phi, phi.at_lag(0)};
    Real c = head_memory(w, nd, n, w.head_cells());
    auto [value, iters] = implicit_node(f, Unknown::BirthFlux, c, R0, tr.b.back(), opt, t, spec.max_step());
    tr.t.push_back(t);
    tr.b.push_back(value);
    tr.max_iterations = std::max(tr.max_iterations, iters);
    tr.total_iterations += iters;
    if (opt.stop && opt.stop(tr.b, n)) {
      tr.stopped_early = n < N;
      break;
    }
  }
  return tr;
}

HistoryFn history_from(const Trajectory& traj, std::size_t end, std::size_t cells) {
  require(end < traj.size() && end >= cells, "history window must lie inside the trajectory");
  return HistoryFn(traj.step, std::vector<Real>(traj.b.begin() + static_cast<long>(end - cells),
                                                traj.b.begin() + static_cast<long>(end + 1)));
}

std::vector<std::vector<Real>> successive_approximations(const ModelSpec& spec, const InitialDistribution& u0,
                                                         Real T, Real step, int iterations) {
  std::size_t N = grid_nodes(spec, T, step);
  KernelWeights w = kernel_weights(spec, step);
  std::vector<Real> init(N + 1);
  for (std::size_t n = 0; n <= N; ++n) init[n] = initial_term(spec, u0, step * static_cast<Real>(n));
  std::vector<std::vector<Real>> out;
  std::vector<Real> cur(N + 1, 0);
  out.push_back(cur);
  for (int k = 0; k < iterations; ++k) {
    std::vector<Real> next(N + 1);
    Nodes nd{cur};
    Real tail = 0;
    for (std::size_t n = 0; n <= N; ++n) {
      tail = advance_tail(w, tail, cur, n);
      Real c = init[n];
      if (n > 0) c += head_memory(w, nd, n, std::min(n, w.head_cells())) + tail + w.later(0) * cur[n];
      next[n] = spec.f()(c);
    }
    cur = std::move(next);
    out.push_back(cur);
  }
  return out;
}

BoundReport l1_bound_check(const ModelSpec& spec, const InitialDistribution& u0, const Trajectory& traj) {
  require(!traj.B.empty(), "bound check needs a trajectory with B values");
  BoundReport r;
  auto sc = subdiagonal_constants(spec);
  r.rho = sc.rho;
  r.M = sc.M;
  r.C1 = spec.f()(sc.M) / (1 - sc.rho);
  r.C2 = spec.beta_upper() / (1 - sc.rho);
  r.u0_norm = u0.l1_norm();
  r.bound = r.C1 + r.C2 * r.u0_norm;
  for (std::size_t n = 0; n < traj.B.size(); ++n)
    if (traj.B[n] > r.max_B) {
      r.max_B = traj.B[n];
      r.argmax_t = traj.t[n];
    }
  r.bound_holds = r.max_B <= r.bound;

  std::size_t from = traj.trailing_begin();
  r.trailing_sup = *std::max_element(traj.b.begin() + static_cast<long>(from), traj.b.end());
  r.trailing_inf = *std::min_element(traj.b.begin() + static_cast<long>(from), traj.b.end());
  Real tol = fate_tol(spec), k1 = spec.kappa1(), k2 = spec.kappa2();
  r.limsup_admissible = std::abs(r.trailing_sup) <= tol || (r.trailing_sup >= k1 - tol && r.trailing_sup <= k2 + tol);
  r.liminf_admissible = r.trailing_inf <= k1 + tol || std::abs(r.trailing_inf - k2) <= tol;

  std::ostringstream os;
  if (!r.bound_holds)
    os << "bound violated: B(" << static_cast<double>(r.argmax_t) << ") = " << static_cast<double>(r.max_B) << " > "
       << static_cast<double>(r.bound);
  else
    os << "max B = " << static_cast<double>(r.max_B) << " <= " << static_cast<double>(r.bound);
  r.message = os.str();
  return r;
}

}  // namespace gm
