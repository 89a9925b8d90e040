#include "gmlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gm {

namespace {

std::string fmt(Real x) {
  std::ostringstream os;
  os.precision(12);
  os << static_cast<double>(x);
  return os.str();
}

bool is_bistability_check(const std::string& name) {
  return name.rfind("f_", 0) == 0 || name.rfind("fixed_points", 0) == 0 || name.rfind("slope_", 0) == 0 ||
         name == "subdiagonal" || name == "lipschitz_bound";
}

}  // namespace

MortalityRate::MortalityRate(PiecewiseConstant rate) : rate_(std::move(rate)) {
  for (Real v : rate_.values()) require(v >= 0, "mortality values must be nonnegative");
}

MortalityRate MortalityRate::constant(Real value) { return MortalityRate(PiecewiseConstant(value)); }

MortalityRate MortalityRate::piecewise(std::vector<Real> breaks, std::vector<Real> values) {
  return MortalityRate(PiecewiseConstant(std::move(breaks), std::move(values)));
}

BirthRate::BirthRate(BirthRateKind kind, PiecewiseConstant profile, Real a0, Real beta_inf)
    : kind_(kind), profile_(std::move(profile)), a0_(a0), beta_inf_(beta_inf) {
  for (Real v : profile_.values()) require(v >= 0, "birth rate values must be nonnegative");
  a_star_ = kind_ == BirthRateKind::CompactSupport ? profile_.support_end() : kInf;
}

namespace {

PiecewiseConstant profile_from(const std::vector<BirthRate::Interval>& intervals, Real tail_from, Real tail) {
  std::vector<Real> lo, hi, v;
  for (const auto& iv : intervals) {
    lo.push_back(iv.lo);
    hi.push_back(iv.hi);
    v.push_back(iv.value);
  }
  return PiecewiseConstant::from_intervals(lo, hi, v, tail_from, tail);
}

}  // namespace

BirthRate BirthRate::compact(const std::vector<Interval>& intervals) {
  return BirthRate(BirthRateKind::CompactSupport, profile_from(intervals, kInf, 0), kInf, 0);
}

BirthRate BirthRate::eventually_constant(const std::vector<Interval>& interior, Real a0, Real beta_inf) {
  require(std::isfinite(a0) && a0 >= 0, "switch age a0 must be a finite nonnegative age");
  require(std::isfinite(beta_inf) && beta_inf > 0, "beta_inf must be positive");
  // Tail from a0 = 0 would put a break at 0; the constant function covers that case.
  PiecewiseConstant p = a0 > 0 ? profile_from(interior, a0, beta_inf) : PiecewiseConstant(beta_inf);
  if (a0 == 0) require(interior.empty(), "a0 = 0 leaves no room for interior birth-rate pieces");
  return BirthRate(BirthRateKind::EventuallyConstant, std::move(p), a0, beta_inf);
}

BirthRate BirthRate::scaled(Real factor) const {
  require(factor >= 0 && std::isfinite(factor), "scale factor must be finite and nonnegative");
  return BirthRate(kind_, profile_.scaled(factor), a0_, beta_inf_ * factor);
}

BirthFunction BirthFunction::hill(Real A, Real B) {
  require(std::isfinite(A) && A > 0 && std::isfinite(B) && B > 0, "hill parameters need A > 0 and B > 0");
  BirthFunction f;
  f.kind_ = BirthFunctionKind::Hill;
  f.A_ = A;
  f.B_ = B;
  // max of 2ABx/(B+x^2)^2 is attained at x = sqrt(B/3)
  f.lipschitz_ = 9 * A / (8 * std::sqrt(3 * B));
  return f;
}

BirthFunction BirthFunction::table(std::vector<Real> xs, std::vector<Real> ys) {
  require(!xs.empty() && xs.size() == ys.size(), "birth-function table needs matching, nonempty columns");
  if (xs.front() != 0) {
    xs.insert(xs.begin(), 0);
    ys.insert(ys.begin(), 0);
  }
  require(xs.size() >= 2, "birth-function table needs a point beyond x = 0");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require(std::isfinite(xs[i]) && std::isfinite(ys[i]), "birth-function table entries must be finite");
    if (i > 0) require(xs[i] > xs[i - 1], "birth-function abscissae must be strictly increasing");
  }
  BirthFunction f;
  f.kind_ = BirthFunctionKind::Table;
  f.xs_ = std::move(xs);
  f.ys_ = std::move(ys);
  for (std::size_t i = 0; i + 1 < f.xs_.size(); ++i)
    f.lipschitz_ = std::max(f.lipschitz_, std::abs((f.ys_[i + 1] - f.ys_[i]) / (f.xs_[i + 1] - f.xs_[i])));
  return f;
}

BirthFunction BirthFunction::linear(Real slope) { return table({1}, {slope}); }

Real BirthFunction::operator()(Real x) const {
  if (kind_ == BirthFunctionKind::Hill) {
    Real x2 = x * x;
    return A_ * x2 / (B_ + x2);
  }
  x = std::max<Real>(x, 0);
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - xs_.begin()), xs_.size() - 1) - 1;
  Real slope = (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
  return ys_[i] + slope * (x - xs_[i]);
}

Real BirthFunction::derivative(Real x) const {
  if (kind_ == BirthFunctionKind::Hill) {
    Real d = B_ + x * x;
    return 2 * A_ * B_ * x / (d * d);
  }
  x = std::max<Real>(x, 0);
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - xs_.begin()), xs_.size() - 1) - 1;
  return (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
}

std::optional<std::pair<Real, Real>> BirthFunction::closed_form_fixed_points() const {
  if (kind_ != BirthFunctionKind::Hill) return std::nullopt;
  Real disc = A_ * A_ - 4 * B_;
  if (disc <= 0) return std::nullopt;
  Real s = std::sqrt(disc);
  // Larger root directly, smaller via the product B to avoid cancellation.
  Real k2 = (A_ + s) / 2;
  return std::pair<Real, Real>{B_ / k2, k2};
}

Real BirthFunction::default_scan_bound() const {
  if (kind_ == BirthFunctionKind::Hill) return A_;  // f < A, so every fixed point lies below A
  return 2 * std::max(xs_.back(), ys_.back());
}

bool AssumptionReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Check* AssumptionReport::first_failure() const {
  for (const auto& c : checks)
    if (!c.passed) return &c;
  return nullptr;
}

Real survival(const MortalityRate& mu, Real a) {
  if (!(a >= 0)) fail(ErrorCode::Domain, "survival is defined for nonnegative ages only");
  return std::exp(-mu.cumulative(a));
}

Real normalization_integral(const BirthRate& beta, const MortalityRate& mu) {
  return detail::integrate_weighted_linear(beta.profile(), mu.rate(), 0, 0, kInf, 1, 0);
}

BirthRate normalize_birth_rate(const BirthRate& raw, const MortalityRate& mu) {
  Real n = normalization_integral(raw, mu);
  if (!(n > 0)) fail(ErrorCode::InvalidArgument, "degenerate birth rate: normalization integral is zero");
  return raw.scaled(1 / n);
}

std::pair<Real, Real> find_fixed_points(const BirthFunction& f, Real x_max) {
  require(std::isfinite(x_max) && x_max > 0, "fixed-point scan bound must be positive");
  constexpr int kScan = 10000;
  auto h = [&](Real x) { return f(x) - x; };
  std::vector<Real> roots;
  Real lo = x_max * 1e-6L;
  Real hlo = h(lo);
  for (int i = 1; i <= kScan; ++i) {
    Real hi = lo + (x_max - lo) * i / kScan;
    Real hhi = h(hi);
    if (hhi == 0) {
      roots.push_back(hi);
    } else if (hlo != 0 && (hlo < 0) != (hhi < 0)) {
      Real a = hi - (x_max - lo) / kScan, b = hi;
      Real ha = hlo;
      for (int k = 0; k < 200 && b - a > 0; ++k) {
        Real m = a + (b - a) / 2;
        if (m == a || m == b) break;
        Real hm = h(m);
        if (hm == 0) {
          a = b = m;
          break;
        }
        if ((hm < 0) == (ha < 0)) {
          a = m;
          ha = hm;
        } else {
          b = m;
        }
      }
      roots.push_back(a + (b - a) / 2);
    }
    hlo = hhi;
  }
  if (roots.size() != 2)
    fail(ErrorCode::NotBistable, "not bistable: f(x) = x has " + std::to_string(roots.size()) +
                                     " positive roots on (0, " + fmt(x_max) + "], expected 2");
  return {roots[0], roots[1]};
}

AssumptionReport check_assumptions(const MortalityRate& mu, const BirthRate& beta, const BirthFunction& f,
                                   Real norm_tolerance) {
  AssumptionReport r;
  auto add = [&](std::string name, bool ok, Real value, std::string detail) {
    r.checks.push_back({std::move(name), ok, static_cast<double>(value), std::move(detail)});
  };

  Real mlow = mu.lower_bound();
  add("mu_lower_positive", mlow > 0, mlow, "mu(a) >= " + fmt(mlow));
  Real blow = beta.profile().min_value();
  add("beta_nonnegative", blow >= 0, blow, "min beta = " + fmt(blow));
  if (beta.compact_support()) {
    Real as = beta.a_star();
    add("beta_compact_support", std::isfinite(as) && as > 0, as, "a* = " + fmt(as));
  } else {
    add("beta_tail_positive", beta.beta_inf() > 0, beta.beta_inf(), "beta_inf = " + fmt(beta.beta_inf()));
    Real lb = mu.last_break();
    add("mu_constant_beyond_a0", lb <= beta.switch_age(), lb,
        "mu constant beyond " + fmt(lb) + ", a0 = " + fmt(beta.switch_age()));
  }
  if (mlow > 0) {
    Real n = normalization_integral(beta, mu);
    add("normalization", std::abs(n - 1) <= norm_tolerance, n,
        "integral = " + fmt(n) + ", tolerance " + fmt(norm_tolerance));
  } else {
    add("normalization", false, 0, "skipped: mortality not bounded below");
  }

  Real f0 = f(0);
  add("f_zero", f0 == 0, f0, "f(0) = " + fmt(f0));

  std::optional<std::pair<Real, Real>> kappa;
  try {
    kappa = find_fixed_points(f, f.default_scan_bound());
    add("fixed_points", true, 2, "kappa1 = " + fmt(kappa->first) + ", kappa2 = " + fmt(kappa->second));
  } catch (const Error& e) {
    add("fixed_points", false, 0, e.what());
  }
  if (kappa) {
    if (auto cf = f.closed_form_fixed_points()) {
      Real d = std::max(std::abs(cf->first - kappa->first), std::abs(cf->second - kappa->second));
      add("fixed_points_closed_form", d <= 1e-10L, d, "max deviation from (A -+ sqrt(A^2 - 4B))/2 = " + fmt(d));
    }
    Real k1 = kappa->first, k2 = kappa->second;
    Real d0 = f.derivative(0), d1 = f.derivative(k1), d2 = f.derivative(k2);
    add("slope_at_0", d0 < 1, d0, "f'(0) = " + fmt(d0));
    add("slope_at_kappa1", d1 > 1, d1, "f'(kappa1) = " + fmt(d1));
    add("slope_at_kappa2", d2 < 1, d2, "f'(kappa2) = " + fmt(d2));

    constexpr int kGrid = 10000;
    Real dmin = kInf, dmax = std::max({d0, d1, d2});
    for (int i = 1; i <= kGrid; ++i) {
      Real x = 2 * k2 * i / kGrid;
      Real d = f.derivative(x);
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
    add("f_increasing", dmin > 0, dmin, "min f' on (0, 2 kappa2] = " + fmt(dmin));
    add("lipschitz_bound", f.lipschitz_bound() >= dmax, f.lipschitz_bound(),
        "bound " + fmt(f.lipschitz_bound()) + " vs sampled max f' " + fmt(dmax));

    Real xc = 10 * k2;
    Real ratio = 0;
    for (int i = 0; i <= 1000; ++i) {
      Real x = xc + 9 * xc * i / 1000;
      ratio = std::max(ratio, f(x) / x);
    }
    add("subdiagonal", ratio < 0.95L, ratio, "max f(x)/x on [10 kappa2, 100 kappa2] = " + fmt(ratio));
  }
  return r;
}

ModelSpec::ModelSpec(MortalityRate mu, BirthRate beta, BirthFunction f, Real norm_tolerance)
    : mu_(std::move(mu)), beta_(std::move(beta)), f_(std::move(f)), norm_tolerance_(norm_tolerance) {
  require(norm_tolerance_ > 0, "normalization tolerance must be positive");
  AssumptionReport r = check_assumptions(mu_, beta_, f_, norm_tolerance_);
  if (const Check* bad = r.first_failure()) {
    ErrorCode code = is_bistability_check(bad->name) ? ErrorCode::NotBistable : ErrorCode::InvalidArgument;
    std::string prefix = code == ErrorCode::NotBistable ? "not bistable: " : "invalid model: ";
    fail(code, prefix + bad->name + " failed (" + bad->detail + ")");
  }
  std::tie(kappa1_, kappa2_) = find_fixed_points(f_, f_.default_scan_bound());
}

Real ModelSpec::kappa(int which) const {
  switch (which) {
    case 0: return 0;
    case 1: return kappa1_;
    case 2: return kappa2_;
    default: fail(ErrorCode::InvalidArgument, "equilibrium index must be 0, 1 or 2");
  }
}

Real ModelSpec::max_step() const { return 1 / (f_.lipschitz_bound() * beta_upper()); }

Real ModelSpec::default_step() const {
  Real cap = max_step() / 4;
  if (beta_.compact_support()) return std::min(cap, beta_.a_star() / 64);
  Real unit = beta_.switch_age() > 0 ? beta_.switch_age() : 1;
  Real d = unit / 64;
  while (d > cap) d /= 2;
  return d;
}

SubdiagonalConstants subdiagonal_constants(const ModelSpec& spec) {
  Real xc = 10 * spec.kappa2();
  Real ratio = 0;
  for (int i = 0; i <= 1000; ++i) {
    Real x = xc + 9 * xc * i / 1000;
    ratio = std::max(ratio, spec.f()(x) / x);
  }
  return {std::min<Real>(ratio + 0.01L, 0.999L), xc};
}

}  // namespace gm
