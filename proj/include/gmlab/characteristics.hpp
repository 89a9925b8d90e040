#pragma once

#include <memory>
#include <vector>

#include "gmlab/common.hpp"
#include "gmlab/model.hpp"
#include "gmlab/profile.hpp"
#include "gmlab/volterra.hpp"

namespace gm {

/// Survival values and per-cell survival moments on a uniform age grid.
/// For a function u = S g with g linear on a cell, its integral over the cell
/// is g(left+) lower[i] + g(right-) upper[i].
struct AgeGrid {
  Real step = 0;
  std::vector<Real> survival;  // S(a_i), i = 0..cells
  std::vector<Real> lower, upper;
  PiecewiseConstant mu;

  std::size_t cells() const { return lower.size(); }
  Real end() const { return step * static_cast<Real>(cells()); }
};

std::shared_ptr<const AgeGrid> make_age_grid(const MortalityRate& mu, Real step, std::size_t cells);

/// Sampled u(t, .) on [0, a_trunc]. Both one-sided values are kept at each
/// node; they differ only at ages where u0 jumps and at the interface a = t.
struct AgeDensity {
  Real t = 0;
  std::shared_ptr<const AgeGrid> grid;
  std::vector<Real> left, right;
  Real interface_jump = 0;  // |u(t, t-) - u(t, t+)|
  Real tail_mass = 0;       // exact mass beyond the grid
  Real tail_bound = 0;      // exp(-mu_lower (a_trunc - a_support)) ||u0||

  Real step() const { return grid->step; }
  std::size_t nodes() const { return left.size(); }
  Real age(std::size_t i) const { return grid->step * static_cast<Real>(i); }
  Real a_trunc() const { return grid->end(); }
};

/// Truncation age a_support + t + 10 / mu_lower.
Real truncation_age(const ModelSpec& spec, const InitialDistribution& u0, Real t);

/// u(t, .) from u0 and the birth flux, by characteristics; t must be a node.
/// A grid from make_age_grid may be passed to share survival moments across snapshots.
AgeDensity reconstruct(const ModelSpec& spec, const InitialDistribution& u0, const Trajectory& traj, Real t,
                       std::shared_ptr<const AgeGrid> grid = nullptr);

/// kappa_which * survival on a grid of the given step and cell count.
AgeDensity equilibrium_density(const ModelSpec& spec, int which, Real step, std::size_t cells);

Real l1_norm(const AgeDensity& d);
/// Truncated L1 distance to the equilibrium density plus the exact tail difference.
Real l1_distance_to_equilibrium(const AgeDensity& d, const ModelSpec& spec, int which);

/// Exact time-t state as a new initial distribution: the newborn part S(a) b(t - a)
/// with b linear per cell, and the transported u0 part.
InitialDistribution state_at(const ModelSpec& spec, const InitialDistribution& u0, const Trajectory& traj,
                             std::size_t n);

/// Mass of the cohort older than `age` at time t, exactly from u0 and b.
Real mass_beyond(const ModelSpec& spec, const InitialDistribution& u0, const Trajectory& traj, std::size_t n,
                 Real age);

}  // namespace gm
