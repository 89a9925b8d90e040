#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gmlab/common.hpp"
#include "gmlab/model.hpp"
#include "gmlab/profile.hpp"

namespace gm {

inline constexpr Real kFixedPointTol = 1e-12L;
inline constexpr int kMaxFixedPointIterations = 100;
inline constexpr Real kHistoryTol = 1e-8L;

inline Real identity_tol(Real step) { return 10 * kFixedPointTol + 10 * step * step; }
inline Real fate_tol(const ModelSpec& spec) { return 0.05L * spec.kappa1(); }

/// Product-trapezoid weights of the kernel K(a) = beta(a) exp(-H(a)) on a grid
/// of step h. Cell k = [k h, (k+1) h] contributes later(k) b(t - k h) +
/// earlier(k) b(t - (k+1) h); both are exact integrals of K against the two
/// hat halves. Beyond tail_start the weights decay geometrically.
struct KernelWeights {
  Real step = 0;
  std::vector<Real> head_later, head_earlier;
  bool geometric = false;
  std::size_t tail_start = 0;
  Real ratio = 0;
  Real tail_later = 0, tail_earlier = 0;

  std::size_t head_cells() const { return head_later.size(); }
  Real later(std::size_t k) const;
  Real earlier(std::size_t k) const;
};

KernelWeights kernel_weights(const ModelSpec& spec, Real step);
/// Weights for an arbitrary step weight on [0, cells * step); compact only.
KernelWeights kernel_weights(const PiecewiseConstant& beta, const PiecewiseConstant& mu, Real step, std::size_t cells);

/// Past birth flux on the grid {-m h, ..., -h, 0}, stored in increasing time.
class HistoryFn {
 public:
  HistoryFn(Real step, std::vector<Real> values);
  static HistoryFn constant(Real step, std::size_t cells, Real value);

  Real step() const { return step_; }
  std::size_t cells() const { return values_.size() - 1; }
  Real span() const { return step_ * static_cast<Real>(cells()); }
  /// Value at time -j h, j = 0..cells().
  Real at_lag(std::size_t j) const { return values_[values_.size() - 1 - j]; }
  const std::vector<Real>& values() const { return values_; }
  HistoryFn scaled(Real factor) const;

 private:
  Real step_;
  std::vector<Real> values_;
};

struct Trajectory {
  Real step = 0;
  std::vector<Real> t;
  std::vector<Real> b;
  std::vector<Real> B;  // empty unless produced by solve_B
  int max_iterations = 0;
  long total_iterations = 0;
  // Set only by the history solver: phi(0) and |phi(0) - b(0+)|.
  Real b_zero_left = 0;
  Real compatibility_residual = 0;
  bool stopped_early = false;

  std::size_t size() const { return b.size(); }
  Real horizon() const { return t.empty() ? 0 : t.back(); }
  /// Index range [begin, size) of the trailing window (last quarter).
  std::size_t trailing_begin() const;
};

struct SolveOptions {
  Real fp_tol = kFixedPointTol;
  int max_iterations = kMaxFixedPointIterations;
  /// Called after every accepted node; returning true ends the march early.
  std::function<bool(std::span<const Real> b, std::size_t n)> stop;
};

/// Birth flux b from an initial distribution.
Trajectory solve_b(const ModelSpec& spec, const InitialDistribution& u0, Real T, Real step,
                   const SolveOptions& opt = {});

/// Cumulative birth input B, with b := f(B) stored alongside.
Trajectory solve_B(const ModelSpec& spec, const InitialDistribution& u0, Real T, Real step,
                   const SolveOptions& opt = {});

/// |phi(0) - f(int K(a) phi(-a) da)| on the history grid.
Real compatibility_residual(const ModelSpec& spec, const HistoryFn& phi);

/// Continues b from a past history (compact beta only). With require_compatible,
/// histories whose residual exceeds history_tol are rejected.
Trajectory solve_from_history(const ModelSpec& spec, const HistoryFn& phi, Real T, const SolveOptions& opt = {},
                              bool require_compatible = true, Real history_tol = kHistoryTol);

/// Trailing window of a trajectory ending at node `end` as a history of `cells` steps.
HistoryFn history_from(const Trajectory& traj, std::size_t end, std::size_t cells);

/// Picard iterates of the discrete birth map started from b = 0.
std::vector<std::vector<Real>> successive_approximations(const ModelSpec& spec, const InitialDistribution& u0,
                                                         Real T, Real step, int iterations);

struct BoundReport {
  Real C1 = 0, C2 = 0, rho = 0, M = 0;
  Real u0_norm = 0;
  Real bound = 0;
  Real max_B = 0;
  Real argmax_t = 0;
  bool bound_holds = false;
  Real trailing_sup = 0, trailing_inf = 0;
  bool limsup_admissible = false;  // in {0} u [k1, k2]
  bool liminf_admissible = false;  // in [0, k1] u {k2}
  std::string message;
};

BoundReport l1_bound_check(const ModelSpec& spec, const InitialDistribution& u0, const Trajectory& traj);

/// Validates T >= step and step <= max_step; returns the node count N (T = N step).
std::size_t grid_nodes(const ModelSpec& spec, Real T, Real step);

}  // namespace gm
