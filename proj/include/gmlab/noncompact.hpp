#pragma once

#include <array>
#include <functional>
#include <utility>
#include <vector>

#include "gmlab/common.hpp"
#include "gmlab/model.hpp"
#include "gmlab/profile.hpp"
#include "gmlab/threshold.hpp"
#include "gmlab/volterra.hpp"

namespace gm {

/// Initial data (alpha, phi) of the coupled system: I(0) = alpha and b on [-a0, 0].
struct CoupledState {
  Real alpha = 0;
  HistoryFn phi = HistoryFn(1, {0});
};

struct CoupledTrajectory {
  Real step = 0;
  Real c0 = 0;  // survival to a0
  std::vector<Real> t, I, b;
  Real compatibility_residual = 0;
  Real max_b_residual = 0;  // max |b_n - f(memory_n + beta_inf I_n)|
  bool stopped_early = false;

  std::size_t size() const { return b.size(); }
  Real horizon() const { return t.empty() ? 0 : t.back(); }
  std::size_t trailing_begin() const;
};

struct CoupledOptions {
  Real fp_tol = kFixedPointTol;
  int max_iterations = kMaxFixedPointIterations;
  bool require_compatible = true;
  Real history_tol = kHistoryTol;
  std::function<bool(const CoupledTrajectory&, std::size_t n)> stop;
};

/// c0 = exp(-H(a0)); requires the eventually-constant birth rate.
Real survival_to_switch(const ModelSpec& spec);

/// (0, 0), (c0 k1 / mu_inf, k1), (c0 k2 / mu_inf, k2).
std::array<std::pair<Real, Real>, 3> coupled_equilibria(const ModelSpec& spec);

/// I(0) = alpha with the constant history phi_value on the step grid of [-a0, 0].
CoupledState coupled_state(const ModelSpec& spec, Real step, Real alpha, Real phi_value);

/// Distance of (alpha, phi) from the compatible set: |phi(0) - f(int K phi + beta_inf alpha)|.
Real coupled_residual(const ModelSpec& spec, const CoupledState& state);

/// Exact exponential integration of I against piecewise-linear b, and the
/// birth equation with the kernel restricted to [0, a0]. The step is the
/// history step and must divide a0.
CoupledTrajectory solve_coupled(const ModelSpec& spec, const CoupledState& state, Real T,
                                const CoupledOptions& opt = {});

struct EquivalenceReport {
  Real step_full = 0, step_coupled = 0;
  Real max_b_dev = 0;
  Real max_I_dev = 0;
  Real I_seed = 0;  // I(a0) from the initial cohort
  Real seed_residual = 0;
  std::vector<Real> t, b_full, b_coupled, I_full, I_coupled;
};

/// Full renewal solve against the coupled system seeded at t = a0. The coupled
/// step may be a divisor of the full step; deviations are taken on the full grid.
EquivalenceReport equivalence_check(const ModelSpec& spec, const InitialDistribution& u0, Real T, Real step,
                                    Real coupled_step = 0);

/// Verdict of the coupled trajectory; the trap needs both the b window and I on one side.
FateReport coupled_fate(const ModelSpec& spec, const CoupledState& state, Real T, bool use_trap = true,
                        bool confirm_half_step = true);

using CoupledFamily = std::function<CoupledState(Real lambda, Real step)>;

/// lambda (c0 / mu_inf, 1) with a constant history.
CoupledFamily equilibrium_ray(const ModelSpec& spec);

ThresholdResult coupled_threshold(const ModelSpec& spec, const CoupledFamily& family, Real width_tol, Real T,
                                  Real step);

}  // namespace gm
