#include "gmlab/delaycheck.hpp"

#include <algorithm>
#include <cmath>

#include "gmlab/characteristics.hpp"
#include "gmlab/noncompact.hpp"
#include "gmlab/volterra.hpp"

namespace gm {

DelaySpec::DelaySpec(Real beta_bar, Real mu, Real tau, BirthFunction f, Real norm_tolerance)
    : beta_bar_(beta_bar), mu_(mu), tau_(tau), gain_(0), f_(std::move(f)) {
  require(std::isfinite(beta_bar) && beta_bar > 0, "delay form needs beta_bar > 0");
  require(std::isfinite(mu) && mu > 0, "delay form needs a positive constant mortality");
  require(std::isfinite(tau) && tau > 0, "delay form needs tau > 0");
  gain_ = beta_bar * std::exp(-mu * tau);
  if (std::abs(gain_ / mu - 1) > norm_tolerance)
    fail(ErrorCode::InvalidArgument, "delay form needs beta_bar e^{-mu tau} / mu = 1");
}

DelaySpec DelaySpec::from_model(const ModelSpec& spec) {
  const auto& mu = spec.mu().rate();
  const auto& beta = spec.beta();
  const auto& p = beta.profile();
  bool shape = mu.breaks().empty() && !beta.compact_support() && beta.switch_age() > 0 && p.breaks().size() == 1 &&
               p.values().front() == 0;
  if (!shape)
    fail(ErrorCode::InvalidArgument, "delay form needs constant mortality and beta = beta_bar on [tau, inf), 0 before");
  return DelaySpec(beta.beta_inf(), mu.tail_value(), beta.switch_age(), spec.f(), spec.norm_tolerance());
}

ModelSpec DelaySpec::model() const {
  return ModelSpec(MortalityRate::constant(mu_), BirthRate::eventually_constant({}, tau_, beta_bar_), f_);
}

std::vector<Real> delay_equilibria(const DelaySpec& d, const ModelSpec& spec) {
  return {0, spec.kappa1() / d.gain(), spec.kappa2() / d.gain()};
}

DelayTrajectory solve_delay(const DelaySpec& d, Real step, const std::vector<Real>& seed, Real T) {
  require(std::isfinite(step) && step > 0, "grid step must be positive");
  auto m = static_cast<std::size_t>(std::llround(d.tau() / step));
  require(m >= 1 && std::abs(static_cast<Real>(m) * step - d.tau()) <= 1e-9L * d.tau(), "step must divide tau");
  require(seed.size() == m + 1, "seed must hold U on the grid of [0, tau]");
  require(T >= d.tau(), "horizon must reach tau");
  auto N = static_cast<std::size_t>(std::ceil(T / step - 1e-9L));

  DelayTrajectory tr;
  tr.step = step;
  tr.U = seed;
  tr.U.reserve(N + 1);
  const BirthFunction& f = d.f();
  Real g = d.gain(), mu = d.mu();
  auto rhs = [&](Real lagged, Real U) { return f(g * lagged) - mu * U; };
  for (std::size_t n = m; n < N; ++n) {
    Real d0 = tr.U[n - m], d1 = tr.U[n - m + 1];
    Real dh = (d0 + d1) / 2;
    Real U = tr.U[n];
    Real k1 = rhs(d0, U);
    Real k2 = rhs(dh, U + step / 2 * k1);
    Real k3 = rhs(dh, U + step / 2 * k2);
    Real k4 = rhs(d1, U + step * k3);
    tr.U.push_back(U + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4));
  }
  tr.t.resize(tr.U.size());
  for (std::size_t n = 0; n < tr.t.size(); ++n) tr.t[n] = step * static_cast<Real>(n);
  return tr;
}

CrossReport cross_validate(const ModelSpec& spec, const InitialDistribution& u0, Real T, Real step) {
  DelaySpec d = DelaySpec::from_model(spec);
  Real tau = d.tau();
  auto m = static_cast<std::size_t>(std::llround(tau / step));
  require(m >= 1 && std::abs(static_cast<Real>(m) * step - tau) <= 1e-9L * tau, "step must divide tau");
  require(T > tau, "horizon must extend past tau");

  Trajectory full = solve_b(spec, u0, T, step);
  auto grid = make_age_grid(spec.mu(), step,
                            static_cast<std::size_t>(std::ceil(truncation_age(spec, u0, full.horizon()) / step)));
  std::vector<Real> U_char(full.size());
  for (std::size_t n = 0; n < full.size(); ++n) U_char[n] = l1_norm(reconstruct(spec, u0, full, full.t[n], grid));

  std::vector<Real> seed(U_char.begin(), U_char.begin() + static_cast<long>(m + 1));
  DelayTrajectory dl = solve_delay(d, step, seed, full.horizon());

  // Coupled system from t = tau: b on [0, tau] and I(tau) from the initial cohort.
  const PiecewiseConstant& mu = spec.mu().rate();
  CoupledState st{u0.transported_integral(PiecewiseConstant(1), mu, tau),
                  HistoryFn(step, std::vector<Real>(full.b.begin(), full.b.begin() + static_cast<long>(m + 1)))};
  CoupledOptions co;
  co.require_compatible = false;
  CoupledTrajectory ct = solve_coupled(spec, st, full.horizon() - tau, co);
  std::vector<Real> b(full.b.begin(), full.b.begin() + static_cast<long>(m + 1));
  b.insert(b.end(), ct.b.begin() + 1, ct.b.end());
  const PiecewiseConstant one(1);

  CrossReport rep;
  rep.step = step;
  rep.tau = tau;
  std::size_t N = std::min({full.size(), dl.U.size(), m + ct.size()});
  for (std::size_t n = m; n < N; ++n) {
    Real young = 0;  // int_0^tau S(a) b(t - a) da
    for (std::size_t i = 0; i < m; ++i) {
      Real a = step * static_cast<Real>(i);
      Real bl = b[n - i], br = b[n - i - 1];
      young += detail::integrate_weighted_linear(one, mu, 0, a, a + step, bl, (br - bl) / step);
    }
    Real Uc = ct.I[n - m] + young;
    rep.t.push_back(full.t[n]);
    rep.U_delay.push_back(dl.U[n]);
    rep.U_characteristics.push_back(U_char[n]);
    rep.U_coupled.push_back(Uc);
    rep.max_delay_vs_characteristics = std::max(rep.max_delay_vs_characteristics, std::abs(dl.U[n] - U_char[n]));
    rep.max_delay_vs_coupled = std::max(rep.max_delay_vs_coupled, std::abs(dl.U[n] - Uc));
    rep.max_characteristics_vs_coupled = std::max(rep.max_characteristics_vs_coupled, std::abs(U_char[n] - Uc));
  }
  return rep;
}

}  // namespace gm
