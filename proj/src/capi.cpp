#include "gmlab/gmlab.h"

#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "gmlab/characteristics.hpp"
#include "gmlab/config.hpp"
#include "gmlab/delaycheck.hpp"
#include "gmlab/noncompact.hpp"
#include "gmlab/stability.hpp"
#include "gmlab/threshold.hpp"
#include "gmlab/volterra.hpp"

using gm::Real;

struct gm_model {
  gm::ModelConfig config;
  gm::ModelSpec spec;
  std::string hash;
};

struct gm_profile {
  gm::InitialDistribution u0;
};

struct gm_trajectory {
  gm::Trajectory traj;
};

struct gm_threshold {
  gm::ThresholdResult result;
};

struct gm_table {
  std::vector<std::string> text_names, names;
  std::vector<std::vector<std::string>> text;  // per row
  std::vector<std::vector<double>> values;     // per row
  std::vector<std::pair<std::string, std::string>> notes;

  void add_row(std::vector<double> v, std::vector<std::string> s = {}) {
    values.push_back(std::move(v));
    text.push_back(std::move(s));
  }
  void note(std::string key, std::string value) { notes.emplace_back(std::move(key), std::move(value)); }
  void note(std::string key, Real v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(v));
    note(std::move(key), std::string(buf));
  }
};

namespace {

thread_local std::string g_last_error;

gm_status status_of(gm::ErrorCode c) {
  switch (c) {
    case gm::ErrorCode::InvalidArgument: return GM_E_INVALID;
    case gm::ErrorCode::Config: return GM_E_CONFIG;
    case gm::ErrorCode::NotBistable: return GM_E_NOT_BISTABLE;
    case gm::ErrorCode::Domain: return GM_E_DOMAIN;
    case gm::ErrorCode::Contraction: return GM_E_CONTRACTION;
    case gm::ErrorCode::IncompatibleHistory: return GM_E_INCOMPATIBLE;
    case gm::ErrorCode::ComparisonViolation: return GM_E_COMPARISON;
    case gm::ErrorCode::Io: return GM_E_IO;
  }
  return GM_E_INTERNAL;
}

template <class F>
gm_status guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return GM_OK;
  } catch (const gm::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return GM_E_INTERNAL;
}

void need(const void* p, const char* what) {
  if (!p) gm::fail(gm::ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

Real step_or_default(const gm::ModelSpec& spec, double step) { return step > 0 ? step : spec.default_step(); }

gm_model* make_model(gm::ModelConfig cfg) {
  gm::ModelSpec spec = cfg.build();
  std::string hash = gm::hex64(gm::fnv1a64(cfg.canonical));
  return new gm_model{std::move(cfg), std::move(spec), std::move(hash)};
}

template <class T>
void emit(T** out, std::unique_ptr<T> v) {
  *out = v.release();
}

gm::FateOptions fate_options(const gm_threshold_options* o) {
  gm::FateOptions f;
  if (o) {
    f.T = o->T;
    f.step = o->step;
    f.use_trap = o->use_trap != 0;
    f.confirm_half_step = o->confirm_half_step != 0;
  }
  return f;
}

}  // namespace

extern "C" {

const char* gm_version(void) { return "1.0.0"; }
const char* gm_last_error(void) { return g_last_error.c_str(); }

const char* gm_status_name(gm_status s) {
  switch (s) {
    case GM_OK: return "ok";
    case GM_E_INVALID: return "invalid argument";
    case GM_E_CONFIG: return "config error";
    case GM_E_NOT_BISTABLE: return "not bistable";
    case GM_E_DOMAIN: return "domain error";
    case GM_E_CONTRACTION: return "contraction failure";
    case GM_E_INCOMPATIBLE: return "incompatible history";
    case GM_E_COMPARISON: return "comparison violation";
    case GM_E_IO: return "i/o error";
    case GM_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

// ---- tables

void gm_table_free(gm_table* t) { delete t; }
size_t gm_table_rows(const gm_table* t) { return t ? t->values.size() : 0; }
size_t gm_table_text_columns(const gm_table* t) { return t ? t->text_names.size() : 0; }
size_t gm_table_columns(const gm_table* t) { return t ? t->names.size() : 0; }

const char* gm_table_text_name(const gm_table* t, size_t col) {
  return t && col < t->text_names.size() ? t->text_names[col].c_str() : nullptr;
}
const char* gm_table_column_name(const gm_table* t, size_t col) {
  return t && col < t->names.size() ? t->names[col].c_str() : nullptr;
}
const char* gm_table_text(const gm_table* t, size_t row, size_t col) {
  if (!t || row >= t->text.size() || col >= t->text[row].size()) return nullptr;
  return t->text[row][col].c_str();
}
double gm_table_value(const gm_table* t, size_t row, size_t col) {
  if (!t || row >= t->values.size() || col >= t->values[row].size()) return std::numeric_limits<double>::quiet_NaN();
  return t->values[row][col];
}
long gm_table_find(const gm_table* t, const char* name) {
  if (!t || !name) return -1;
  for (size_t i = 0; i < t->names.size(); ++i)
    if (t->names[i] == name) return static_cast<long>(i);
  return -1;
}
size_t gm_table_notes(const gm_table* t) { return t ? t->notes.size() : 0; }
const char* gm_table_note_key(const gm_table* t, size_t i) {
  return t && i < t->notes.size() ? t->notes[i].first.c_str() : nullptr;
}
const char* gm_table_note_value(const gm_table* t, size_t i) {
  return t && i < t->notes.size() ? t->notes[i].second.c_str() : nullptr;
}
const char* gm_table_note(const gm_table* t, const char* key) {
  if (!t || !key) return nullptr;
  for (const auto& kv : t->notes)
    if (kv.first == key) return kv.second.c_str();
  return nullptr;
}

gm_status gm_table_write_csv(const gm_table* t, const char* path) {
  return guard([&] {
    need(t, "table");
    need(path, "path");
    std::FILE* fp = std::fopen(path, "wb");
    if (!fp) gm::fail(gm::ErrorCode::Io, std::string("cannot write '") + path + "'");
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> guard_fp(fp, &std::fclose);
    bool first = true;
    auto sep = [&] {
      if (!first) std::fputc(',', fp);
      first = false;
    };
    for (const auto& n : t->text_names) sep(), std::fputs(n.c_str(), fp);
    for (const auto& n : t->names) sep(), std::fputs(n.c_str(), fp);
    std::fputc('\n', fp);
    for (size_t r = 0; r < t->values.size(); ++r) {
      first = true;
      for (const auto& s : t->text[r]) sep(), std::fputs(s.c_str(), fp);
      for (double v : t->values[r]) sep(), std::fprintf(fp, "%.17g", v);
      std::fputc('\n', fp);
    }
    if (std::ferror(fp)) gm::fail(gm::ErrorCode::Io, std::string("write failed for '") + path + "'");
  });
}

// ---- model

gm_status gm_model_load(const char* ini_path, gm_model** out) {
  return guard([&] {
    need(ini_path, "config path");
    need(out, "output");
    *out = make_model(gm::load_model_config(ini_path));
  });
}

gm_status gm_model_parse(const char* ini_text, gm_model** out) {
  return guard([&] {
    need(ini_text, "config text");
    need(out, "output");
    *out = make_model(gm::parse_model_config(ini_text));
  });
}

void gm_model_free(gm_model* m) { delete m; }
const char* gm_model_hash(const gm_model* m) { return m ? m->hash.c_str() : ""; }
const char* gm_model_canonical(const gm_model* m) { return m ? m->config.canonical.c_str() : ""; }

gm_status gm_model_get_info(const gm_model* m, gm_model_info* out) {
  return guard([&] {
    need(m, "model");
    need(out, "output");
    const auto& s = m->spec;
    out->kappa1 = static_cast<double>(s.kappa1());
    out->kappa2 = static_cast<double>(s.kappa2());
    out->mu_lower = static_cast<double>(s.mu_lower());
    out->beta_upper = static_cast<double>(s.beta_upper());
    out->lipschitz = static_cast<double>(s.f().lipschitz_bound());
    out->max_step = static_cast<double>(s.max_step());
    out->default_step = static_cast<double>(s.default_step());
    out->compact = s.beta().compact_support() ? 1 : 0;
    out->a_star = static_cast<double>(s.beta().a_star());
    out->a0 = static_cast<double>(s.beta().switch_age());
    out->beta_inf = static_cast<double>(s.beta().beta_inf());
    out->normalization = static_cast<double>(gm::normalization_integral(s));
  });
}

gm_status gm_validate_file(const char* ini_path, gm_table** checks, int* all_passed) {
  return guard([&] {
    need(ini_path, "config path");
    need(checks, "output");
    gm::ModelConfig cfg = gm::load_model_config(ini_path);
    gm::AssumptionReport rep = cfg.checks();
    auto t = std::make_unique<gm_table>();
    t->text_names = {"check", "detail"};
    t->names = {"passed", "value"};
    for (const auto& c : rep.checks) t->add_row({c.passed ? 1.0 : 0.0, c.value}, {c.name, c.detail});
    t->note("spec_hash", gm::hex64(gm::fnv1a64(cfg.canonical)));
    if (all_passed) *all_passed = rep.all_passed() ? 1 : 0;
    *checks = t.release();
  });
}

// ---- profiles

gm_status gm_profile_step(double lo, double hi, double value, gm_profile** out) {
  return guard([&] {
    need(out, "output");
    *out = new gm_profile{gm::InitialDistribution::step(lo, hi, value)};
  });
}

gm_status gm_profile_exponential(double c, double k, gm_profile** out) {
  return guard([&] {
    need(out, "output");
    *out = new gm_profile{gm::InitialDistribution::exponential(c, k)};
  });
}

gm_status gm_profile_equilibrium(const gm_model* m, int which, gm_profile** out) {
  return guard([&] {
    need(m, "model");
    need(out, "output");
    *out = new gm_profile{gm::InitialDistribution::equilibrium(m->spec, which)};
  });
}

gm_status gm_profile_samples(double h, const double* values, size_t n, gm_profile** out) {
  return guard([&] {
    need(values, "values");
    need(out, "output");
    *out = new gm_profile{gm::InitialDistribution::samples(h, std::vector<Real>(values, values + n))};
  });
}

gm_status gm_profile_sum(const gm_profile* a, const gm_profile* b, gm_profile** out) {
  return guard([&] {
    need(a, "profile");
    need(b, "profile");
    need(out, "output");
    *out = new gm_profile{a->u0 + b->u0};
  });
}

gm_status gm_profile_scaled(const gm_profile* p, double factor, gm_profile** out) {
  return guard([&] {
    need(p, "profile");
    need(out, "output");
    *out = new gm_profile{p->u0.scaled(factor)};
  });
}

void gm_profile_free(gm_profile* p) { delete p; }
double gm_profile_l1(const gm_profile* p) { return p ? static_cast<double>(p->u0.l1_norm()) : 0.0; }

// ---- birth flux

gm_status gm_simulate(const gm_model* m, const gm_profile* u0, double T, double step, int cumulative,
                      gm_trajectory** out) {
  return guard([&] {
    need(m, "model");
    need(u0, "profile");
    need(out, "output");
    Real h = step_or_default(m->spec, step);
    auto tr = cumulative ? gm::solve_B(m->spec, u0->u0, T, h) : gm::solve_b(m->spec, u0->u0, T, h);
    *out = new gm_trajectory{std::move(tr)};
  });
}

void gm_trajectory_free(gm_trajectory* t) { delete t; }
size_t gm_trajectory_size(const gm_trajectory* t) { return t ? t->traj.size() : 0; }
double gm_trajectory_step(const gm_trajectory* t) { return t ? static_cast<double>(t->traj.step) : 0.0; }

gm_status gm_trajectory_table(const gm_trajectory* t, gm_table** out) {
  return guard([&] {
    need(t, "trajectory");
    need(out, "output");
    auto tab = std::make_unique<gm_table>();
    const auto& tr = t->traj;
    bool cum = !tr.B.empty();
    tab->names = cum ? std::vector<std::string>{"t", "b", "B"} : std::vector<std::string>{"t", "b"};
    for (size_t n = 0; n < tr.size(); ++n) {
      std::vector<double> row{static_cast<double>(tr.t[n]), static_cast<double>(tr.b[n])};
      if (cum) row.push_back(static_cast<double>(tr.B[n]));
      tab->add_row(std::move(row));
    }
    tab->note("step", tr.step);
    tab->note("max_iterations", static_cast<Real>(tr.max_iterations));
    emit(out, std::move(tab));
  });
}

gm_status gm_bound_report(const gm_model* m, const gm_profile* u0, const gm_trajectory* t, gm_table** out) {
  return guard([&] {
    need(m, "model");
    need(u0, "profile");
    need(t, "trajectory");
    need(out, "output");
    gm::BoundReport r = gm::l1_bound_check(m->spec, u0->u0, t->traj);
    auto tab = std::make_unique<gm_table>();
    tab->names = {"C1", "C2", "rho", "M", "u0_norm", "bound", "max_B", "argmax_t", "bound_holds", "trailing_sup",
                  "trailing_inf", "limsup_admissible", "liminf_admissible"};
    auto d = [](Real x) { return static_cast<double>(x); };
    tab->add_row({d(r.C1), d(r.C2), d(r.rho), d(r.M), d(r.u0_norm), d(r.bound), d(r.max_B), d(r.argmax_t),
                  r.bound_holds ? 1.0 : 0.0, d(r.trailing_sup), d(r.trailing_inf), r.limsup_admissible ? 1.0 : 0.0,
                  r.liminf_admissible ? 1.0 : 0.0});
    tab->note("message", r.message);
    emit(out, std::move(tab));
  });
}

gm_status gm_density(const gm_model* m, const gm_profile* u0, const gm_trajectory* t, double at, gm_table** out) {
  return guard([&] {
    need(m, "model");
    need(u0, "profile");
    need(t, "trajectory");
    need(out, "output");
    gm::AgeDensity d = gm::reconstruct(m->spec, u0->u0, t->traj, at);
    auto tab = std::make_unique<gm_table>();
    tab->names = {"a", "u_left", "u_right"};
    for (size_t i = 0; i < d.nodes(); ++i)
      tab->add_row({static_cast<double>(d.age(i)), static_cast<double>(d.left[i]), static_cast<double>(d.right[i])});
    tab->note("t", d.t);
    tab->note("a_trunc", d.a_trunc());
    tab->note("tail_mass", d.tail_mass);
    tab->note("tail_bound", d.tail_bound);
    tab->note("interface_jump", d.interface_jump);
    tab->note("l1", gm::l1_norm(d));
    emit(out, std::move(tab));
  });
}

gm_status gm_norms(const gm_model* m, const gm_profile* u0, const gm_trajectory* t, double every, gm_table** out) {
  return guard([&] {
    need(m, "model");
    need(u0, "profile");
    need(t, "trajectory");
    need(out, "output");
    gm::require(every > 0, "sampling interval must be positive");
    const auto& tr = t->traj;
    Real h = tr.step;
    auto grid = gm::make_age_grid(
        m->spec.mu(), h, static_cast<size_t>(std::ceil(gm::truncation_age(m->spec, u0->u0, tr.horizon()) / h)));
    auto stride = std::max<size_t>(1, static_cast<size_t>(std::llround(every / h)));
    auto tab = std::make_unique<gm_table>();
    tab->names = {"t", "b", "l1", "dist0", "dist1", "dist2"};
    for (size_t n = 0; n < tr.size(); n += stride) {
      gm::AgeDensity d = gm::reconstruct(m->spec, u0->u0, tr, tr.t[n], grid);
      tab->add_row({static_cast<double>(tr.t[n]), static_cast<double>(tr.b[n]), static_cast<double>(gm::l1_norm(d)),
                    static_cast<double>(gm::l1_distance_to_equilibrium(d, m->spec, 0)),
                    static_cast<double>(gm::l1_distance_to_equilibrium(d, m->spec, 1)),
                    static_cast<double>(gm::l1_distance_to_equilibrium(d, m->spec, 2))});
    }
    emit(out, std::move(tab));
  });
}

gm_status gm_stability(const gm_model* m, gm_table** out) {
  return guard([&] {
    need(m, "model");
    need(out, "output");
    auto tab = std::make_unique<gm_table>();
    tab->text_names = {"stability"};
    tab->names = {"which", "kappa", "slope", "stable", "root"};
    for (const auto& r : gm::stability_table(m->spec)) {
      bool stable = r.stability == gm::Stability::Stable;
      tab->add_row({static_cast<double>(r.which), static_cast<double>(r.kappa), static_cast<double>(r.slope),
                    stable ? 1.0 : 0.0, static_cast<double>(r.root)},
                   {stable ? "stable" : "unstable"});
    }
    emit(out, std::move(tab));
  });
}

// ---- thresholds

void gm_threshold_defaults(gm_threshold_options* o) {
  if (!o) return;
  o->width = 1e-3;
  o->T = 200;
  o->step = 0;
  o->confirm_half_step = 1;
  o->use_trap = 1;
}

gm_status gm_find_threshold(const gm_model* m, const gm_profile* base, const gm_threshold_options* o,
                            gm_threshold** out) {
  return guard([&] {
    need(m, "model");
    need(base, "profile");
    need(o, "options");
    need(out, "output");
    auto family = gm::MonotoneFamily::scaling(m->spec, base->u0);
    *out = new gm_threshold{gm::find_threshold(m->spec, family, o->width, fate_options(o))};
  });
}

gm_status gm_coupled_threshold(const gm_model* m, const gm_threshold_options* o, gm_threshold** out) {
  return guard([&] {
    need(m, "model");
    need(o, "options");
    need(out, "output");
    *out = new gm_threshold{
        gm::coupled_threshold(m->spec, gm::equilibrium_ray(m->spec), o->width, o->T, o->step)};
  });
}

void gm_threshold_free(gm_threshold* t) { delete t; }

gm_status gm_threshold_bracket(const gm_threshold* t, double* lo, double* hi, int* all_extinct) {
  return guard([&] {
    need(t, "threshold");
    if (lo) *lo = static_cast<double>(t->result.lo);
    if (hi) *hi = static_cast<double>(t->result.hi);
    if (all_extinct) *all_extinct = t->result.kind == gm::ThresholdKind::AllExtinct ? 1 : 0;
  });
}

gm_status gm_threshold_log(const gm_threshold* t, gm_table** out) {
  return guard([&] {
    need(t, "threshold");
    need(out, "output");
    const auto& r = t->result;
    auto tab = std::make_unique<gm_table>();
    tab->text_names = {"fate"};
    tab->names = {"lambda", "verdict", "horizon", "trailing_min", "trailing_max"};
    for (const auto& e : r.log)
      tab->add_row({static_cast<double>(e.lambda), static_cast<double>(static_cast<int>(e.verdict)),
                    static_cast<double>(e.horizon), static_cast<double>(e.trailing_min),
                    static_cast<double>(e.trailing_max)},
                   {gm::verdict_name(e.verdict)});
    tab->note("kind", r.kind == gm::ThresholdKind::AllExtinct ? "all_extinct" : "bracket");
    tab->note("lo", r.lo);
    tab->note("hi", r.hi);
    tab->note("estimate", r.estimate());
    tab->note("width", r.width());
    tab->note("horizon_doubled", r.horizon_doubled ? "true" : "false");
    tab->note("accepted_undecided", r.accepted_undecided ? "true" : "false");
    tab->note("final_horizon", r.final_horizon);
    tab->note("inversions", static_cast<Real>(gm::count_inversions(r.log)));
    emit(out, std::move(tab));
  });
}

gm_status gm_hover(const gm_model* m, const gm_profile* base, double lambda, double T_long, double step,
                   double every, gm_table** out) {
  return guard([&] {
    need(m, "model");
    need(base, "profile");
    need(out, "output");
    auto family = gm::MonotoneFamily::scaling(m->spec, base->u0);
    gm::HoverReport h = gm::threshold_diagnostics(m->spec, family, lambda, T_long, step, every);
    auto tab = std::make_unique<gm_table>();
    tab->names = {"t", "b", "l1", "dist0", "dist1", "dist2"};
    const auto& tr = h.trajectory;
    size_t n = 0;
    for (size_t i = 0; i < h.sample_t.size(); ++i) {
      while (n + 1 < tr.size() && tr.t[n] < h.sample_t[i] - tr.step / 2) ++n;
      tab->add_row({static_cast<double>(h.sample_t[i]), static_cast<double>(tr.b[n]), static_cast<double>(h.l1[i]),
                    static_cast<double>(h.dist0[i]), static_cast<double>(h.dist1[i]),
                    static_cast<double>(h.dist2[i])});
    }
    tab->note("lambda", h.lambda);
    tab->note("horizon", h.horizon);
    tab->note("transient", h.transient);
    tab->note("band_lo", h.band_lo);
    tab->note("band_hi", h.band_hi);
    tab->note("exit_time", h.exit_time);
    tab->note("hover_duration", h.hover_duration);
    tab->note("delta_est", h.delta_est);
    tab->note("trailing_min", h.trailing_min);
    tab->note("trailing_max", h.trailing_max);
    tab->note("min_l1", h.min_l1);
    tab->note("max_l1", h.max_l1);
    tab->note("min_dist0", h.min_dist0);
    tab->note("min_dist2", h.min_dist2);
    tab->note("final_dist2", h.final_dist2);
    emit(out, std::move(tab));
  });
}

gm_status gm_sweep(const gm_model* m, const gm_profile* base, const double* lambdas, size_t n,
                   const gm_threshold_options* o, unsigned threads, gm_table** out) {
  return guard([&] {
    need(m, "model");
    need(base, "profile");
    need(lambdas, "lambdas");
    need(out, "output");
    auto family = gm::MonotoneFamily::scaling(m->spec, base->u0);
    std::vector<Real> ls(lambdas, lambdas + n);
    auto rows = gm::sweep(m->spec, family, ls, fate_options(o), threads);
    auto tab = std::make_unique<gm_table>();
    tab->text_names = {"fate"};
    tab->names = {"lambda", "verdict", "horizon", "trailing_min", "trailing_max", "trapped"};
    std::vector<gm::FateLogEntry> log;
    for (const auto& r : rows) {
      tab->add_row({static_cast<double>(r.lambda), static_cast<double>(static_cast<int>(r.fate.verdict)),
                    static_cast<double>(r.fate.horizon), static_cast<double>(r.fate.trailing_min),
                    static_cast<double>(r.fate.trailing_max), r.fate.trapped ? 1.0 : 0.0},
                   {gm::verdict_name(r.fate.verdict)});
      log.push_back({r.lambda, r.fate.verdict, r.fate.horizon, r.fate.trailing_min, r.fate.trailing_max});
    }
    tab->note("inversions", static_cast<Real>(gm::count_inversions(log)));
    emit(out, std::move(tab));
  });
}

// ---- coupled system

gm_status gm_coupled_equilibria(const gm_model* m, gm_table** out) {
  return guard([&] {
    need(m, "model");
    need(out, "output");
    auto eq = gm::coupled_equilibria(m->spec);
    auto tab = std::make_unique<gm_table>();
    tab->names = {"which", "I", "b"};
    for (int i = 0; i < 3; ++i)
      tab->add_row({static_cast<double>(i), static_cast<double>(eq[i].first), static_cast<double>(eq[i].second)});
    tab->note("c0", gm::survival_to_switch(m->spec));
    emit(out, std::move(tab));
  });
}

gm_status gm_coupled_solve(const gm_model* m, double alpha, double phi, double T, double step, int strict,
                           gm_table** out) {
  return guard([&] {
    need(m, "model");
    need(out, "output");
    Real h = step_or_default(m->spec, step);
    gm::CoupledState st = gm::coupled_state(m->spec, h, alpha, phi);
    gm::CoupledOptions co;
    co.require_compatible = strict != 0;
    gm::CoupledTrajectory tr = gm::solve_coupled(m->spec, st, T, co);
    auto tab = std::make_unique<gm_table>();
    tab->names = {"t", "I", "b"};
    for (size_t n = 0; n < tr.size(); ++n)
      tab->add_row({static_cast<double>(tr.t[n]), static_cast<double>(tr.I[n]), static_cast<double>(tr.b[n])});
    tab->note("c0", tr.c0);
    tab->note("compatibility_residual", tr.compatibility_residual);
    tab->note("max_b_residual", tr.max_b_residual);
    emit(out, std::move(tab));
  });
}

gm_status gm_equivalence(const gm_model* m, const gm_profile* u0, double T, double step, double coupled_step,
                         gm_table** out) {
  return guard([&] {
    need(m, "model");
    need(u0, "profile");
    need(out, "output");
    Real h = step_or_default(m->spec, step);
    gm::EquivalenceReport r = gm::equivalence_check(m->spec, u0->u0, T, h, coupled_step);
    auto tab = std::make_unique<gm_table>();
    tab->names = {"t", "b_full", "b_coupled", "I_full", "I_coupled"};
    for (size_t i = 0; i < r.t.size(); ++i)
      tab->add_row({static_cast<double>(r.t[i]), static_cast<double>(r.b_full[i]),
                    static_cast<double>(r.b_coupled[i]), static_cast<double>(r.I_full[i]),
                    static_cast<double>(r.I_coupled[i])});
    tab->note("max_b_dev", r.max_b_dev);
    tab->note("max_I_dev", r.max_I_dev);
    tab->note("I_seed", r.I_seed);
    tab->note("seed_residual", r.seed_residual);
    emit(out, std::move(tab));
  });
}

gm_status gm_delay_compare(const gm_model* m, const gm_profile* u0, double T, double step, gm_table** out) {
  return guard([&] {
    need(m, "model");
    need(u0, "profile");
    need(out, "output");
    Real h = step_or_default(m->spec, step);
    gm::CrossReport r = gm::cross_validate(m->spec, u0->u0, T, h);
    auto tab = std::make_unique<gm_table>();
    tab->names = {"t", "U_delay", "U_characteristics", "deviation", "U_coupled"};
    for (size_t i = 0; i < r.t.size(); ++i)
      tab->add_row({static_cast<double>(r.t[i]), static_cast<double>(r.U_delay[i]),
                    static_cast<double>(r.U_characteristics[i]),
                    static_cast<double>(std::abs(r.U_delay[i] - r.U_characteristics[i])),
                    static_cast<double>(r.U_coupled[i])});
    tab->note("max_delay_vs_characteristics", r.max_delay_vs_characteristics);
    tab->note("max_delay_vs_coupled", r.max_delay_vs_coupled);
    tab->note("max_characteristics_vs_coupled", r.max_characteristics_vs_coupled);
    emit(out, std::move(tab));
  });
}

}  // extern "C"
