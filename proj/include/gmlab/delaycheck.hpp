#pragma once

#include <vector>

#include "gmlab/common.hpp"
#include "gmlab/model.hpp"
#include "gmlab/profile.hpp"

namespace gm {

/// U' = f(beta_bar e^{-mu tau} U(t - tau)) - mu U, for beta = beta_bar on [tau, inf)
/// and constant mu. The birth rate must satisfy beta_bar e^{-mu tau} / mu = 1.
class DelaySpec {
 public:
  DelaySpec(Real beta_bar, Real mu, Real tau, BirthFunction f, Real norm_tolerance = kClosedFormNormTolerance);
  /// Reads the delay form off a model with constant mu and beta = beta_bar 1_{a >= tau}.
  static DelaySpec from_model(const ModelSpec& spec);
  ModelSpec model() const;

  Real beta_bar() const { return beta_bar_; }
  Real mu() const { return mu_; }
  Real tau() const { return tau_; }
  const BirthFunction& f() const { return f_; }
  /// beta_bar e^{-mu tau}
  Real gain() const { return gain_; }

 private:
  Real beta_bar_, mu_, tau_, gain_;
  BirthFunction f_;
};

struct DelayTrajectory {
  Real step = 0;
  std::vector<Real> t, U;
};

/// {0, k1 / gain, k2 / gain}
std::vector<Real> delay_equilibria(const DelaySpec& d, const ModelSpec& spec);

/// Method of steps with classical RK4; U(t - tau) at the half step is linearly
/// interpolated. `seed` holds U at t = 0, step, ..., tau, and step must divide tau.
DelayTrajectory solve_delay(const DelaySpec& d, Real step, const std::vector<Real>& seed, Real T);

struct CrossReport {
  Real step = 0;
  Real tau = 0;
  std::vector<Real> t, U_delay, U_characteristics, U_coupled;
  Real max_delay_vs_characteristics = 0;
  Real max_delay_vs_coupled = 0;
  Real max_characteristics_vs_coupled = 0;
};

/// U for t >= tau three ways: the delay equation seeded from characteristics on [0, tau],
/// the L1 norm of the reconstructed age density, and I + int_0^tau u from the coupled system.
CrossReport cross_validate(const ModelSpec& spec, const InitialDistribution& u0, Real T, Real step);

}  // namespace gm
