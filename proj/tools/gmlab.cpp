// Experiment runner over the C interface. Every run writes its CSV tables and
// a JSON manifest into --out-dir; `replay` re-runs a manifest.

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "gmlab/gmlab.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitUsage = 64;

struct Failure {
  gm_status status;
  std::string message;
};

int exit_code(gm_status s) {
  switch (s) {
    case GM_OK: return kExitOk;
    case GM_E_CONFIG: return kExitUsage;
    case GM_E_INVALID:
    case GM_E_NOT_BISTABLE:
    case GM_E_DOMAIN:
    case GM_E_INCOMPATIBLE: return kExitValidation;
    default: return kExitNumerical;
  }
}

void check(gm_status s) {
  if (s != GM_OK) throw Failure{s, gm_last_error()};
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  Handle(Handle&& o) noexcept : p(std::exchange(o.p, nullptr)) {}
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Model = Handle<gm_model, gm_model_free>;
using Profile = Handle<gm_profile, gm_profile_free>;
using Traj = Handle<gm_trajectory, gm_trajectory_free>;
using Table = Handle<gm_table, gm_table_free>;
using Threshold = Handle<gm_threshold, gm_threshold_free>;

double number(const std::string& s) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || errno != 0 || *end != '\0') throw Failure{GM_E_CONFIG, "not a number: '" + s + "'"};
  return v;
}

std::vector<double> numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(number(tok));
  return out;
}

// step:lo,hi,value | exp:c,k | eq:which | samples:h,v0,v1,... ; terms joined by '+'
void parse_profile(const gm_model* m, const std::string& spec, Profile& out) {
  std::stringstream ss(spec);
  std::string term;
  bool first = true;
  while (std::getline(ss, term, '+')) {
    auto colon = term.find(':');
    if (colon == std::string::npos) throw Failure{GM_E_CONFIG, "profile term needs kind:args, got '" + term + "'"};
    std::string kind = term.substr(0, colon);
    std::vector<double> a = numbers(term.substr(colon + 1));
    Profile p;
    auto arity = [&](size_t n) {
      if (a.size() != n) throw Failure{GM_E_CONFIG, "profile '" + kind + "' takes " + std::to_string(n) + " numbers"};
    };
    if (kind == "step") {
      arity(3);
      check(gm_profile_step(a[0], a[1], a[2], p.out()));
    } else if (kind == "exp") {
      arity(2);
      check(gm_profile_exponential(a[0], a[1], p.out()));
    } else if (kind == "eq") {
      arity(1);
      check(gm_profile_equilibrium(m, static_cast<int>(a[0]), p.out()));
    } else if (kind == "samples") {
      if (a.size() < 3) throw Failure{GM_E_CONFIG, "samples profile takes a spacing and at least two values"};
      check(gm_profile_samples(a[0], a.data() + 1, a.size() - 1, p.out()));
    } else {
      throw Failure{GM_E_CONFIG, "unknown profile kind '" + kind + "'"};
    }
    if (first) {
      std::swap(out.p, p.p);
      first = false;
    } else {
      Profile sum;
      check(gm_profile_sum(out.get(), p.get(), sum.out()));
      std::swap(out.p, sum.p);
    }
  }
  if (first) throw Failure{GM_E_CONFIG, "empty profile"};
}

struct Run {
  std::string subcommand;
  fs::path out_dir;
  std::string config;
  ordered_json params = ordered_json::object();
  std::vector<std::string> outputs;
  std::string spec_hash;

  void write(const gm_table* t, const std::string& name) {
    check(gm_table_write_csv(t, (out_dir / name).string().c_str()));
    outputs.push_back(name);
  }

  void manifest() const {
    ordered_json j;
    j["artifact"] = "gmlab";
    j["artifact_version"] = gm_version();
    j["subcommand"] = subcommand;
    j["config"] = config;
    j["spec_hash"] = spec_hash;
    j["parameters"] = params;
    j["outputs"] = outputs;
    std::ofstream f(out_dir / (subcommand + ".manifest.json"), std::ios::binary);
    f << j.dump(2) << "\n";
    if (!f) throw Failure{GM_E_IO, "cannot write manifest"};
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_notes(const gm_table* t) {
  for (size_t i = 0; i < gm_table_notes(t); ++i)
    std::cout << gm_table_note_key(t, i) << " = " << gm_table_note_value(t, i) << "\n";
}

double note_number(const gm_table* t, const char* key) {
  const char* v = gm_table_note(t, key);
  return v ? std::strtod(v, nullptr) : NAN;
}

// Options shared by the subcommands; every option that was registered is
// recorded in the manifest under its long name.
struct Options {
  std::string config;
  std::string out_dir = ".";
  std::string u0;
  double T = 0, step = 0, width = 1e-3, at = -1, every = 1, hover = 0;
  double from = 0, to = 2, alpha = 0, phi = 0, coupled_step = 0;
  int count = 50, random = 0;
  unsigned threads = 0;
  unsigned long long seed = 1;
  bool cumulative = false, no_confirm = false, no_trap = false, strict = false;
  std::string mode = "solve";
};

using Handler = std::function<int(Run&, const Options&, gm_model*)>;

int cmd_validate(Run& run, const Options& o) {
  Table checks;
  int all = 0;
  check(gm_validate_file(o.config.c_str(), checks.out(), &all));
  run.spec_hash = gm_table_note(checks.get(), "spec_hash");
  for (size_t r = 0; r < gm_table_rows(checks.get()); ++r) {
    bool ok = gm_table_value(checks.get(), r, 0) != 0;
    std::cout << (ok ? "PASS " : "FAIL ") << gm_table_text(checks.get(), r, 0) << " "
              << fmt(gm_table_value(checks.get(), r, 1)) << "  " << gm_table_text(checks.get(), r, 1) << "\n";
  }
  run.write(checks.get(), "validate.csv");
  run.manifest();
  if (all) return kExitOk;
  Model m;
  gm_status s = gm_model_load(o.config.c_str(), m.out());
  std::cout << (s == GM_OK ? "model rejected" : gm_last_error()) << "\n";
  return kExitValidation;
}

Traj simulate(const gm_model* m, const Options& o, const Profile& u0, bool cumulative) {
  Traj tr;
  check(gm_simulate(m, u0.get(), o.T, o.step, cumulative ? 1 : 0, tr.out()));
  return tr;
}

gm_threshold_options threshold_options(const Options& o) {
  gm_threshold_options t;
  gm_threshold_defaults(&t);
  t.width = o.width;
  t.T = o.T;
  t.step = o.step;
  t.confirm_half_step = o.no_confirm ? 0 : 1;
  t.use_trap = o.no_trap ? 0 : 1;
  return t;
}

void report_threshold(Run& run, const gm_threshold* th, const std::string& name) {
  Table log;
  check(gm_threshold_log(th, log.out()));
  run.write(log.get(), name + ".csv");
  print_notes(log.get());
  double lo = 0, hi = 0;
  int all_extinct = 0;
  check(gm_threshold_bracket(th, &lo, &hi, &all_extinct));
  std::ofstream f(run.out_dir / (name + "_result.csv"), std::ios::binary);
  f << "kind,lo,hi,estimate,width,accepted_undecided,horizon_doubled\n"
    << (all_extinct ? "all_extinct" : "bracket") << "," << fmt(lo) << "," << fmt(hi) << ","
    << gm_table_note(log.get(), "estimate") << "," << gm_table_note(log.get(), "width") << ","
    << gm_table_note(log.get(), "accepted_undecided") << "," << gm_table_note(log.get(), "horizon_doubled") << "\n";
  if (!f) throw Failure{GM_E_IO, "cannot write threshold result"};
  run.outputs.push_back(name + "_result.csv");
}

std::map<std::string, Handler> handlers() {
  std::map<std::string, Handler> h;
  h["simulate"] = [](Run& run, const Options& o, gm_model* m) {
    Profile u0;
    parse_profile(m, o.u0, u0);
    Traj tr = simulate(m, o, u0, o.cumulative);
    Table t;
    check(gm_trajectory_table(tr.get(), t.out()));
    run.write(t.get(), "simulate.csv");
    if (o.cumulative) {
      Table b;
      check(gm_bound_report(m, u0.get(), tr.get(), b.out()));
      run.write(b.get(), "bound.csv");
      print_notes(b.get());
    }
    return kExitOk;
  };
  h["density"] = [](Run& run, const Options& o, gm_model* m) {
    Profile u0;
    parse_profile(m, o.u0, u0);
    Traj tr = simulate(m, o, u0, false);
    Table t;
    check(gm_density(m, u0.get(), tr.get(), o.at < 0 ? o.T : o.at, t.out()));
    run.write(t.get(), "density.csv");
    print_notes(t.get());
    return kExitOk;
  };
  h["norms"] = [](Run& run, const Options& o, gm_model* m) {
    Profile u0;
    parse_profile(m, o.u0, u0);
    Traj tr = simulate(m, o, u0, false);
    Table t;
    check(gm_norms(m, u0.get(), tr.get(), o.every, t.out()));
    run.write(t.get(), "norms.csv");
    return kExitOk;
  };
  h["stability"] = [](Run& run, const Options&, gm_model* m) {
    Table t;
    check(gm_stability(m, t.out()));
    for (size_t r = 0; r < gm_table_rows(t.get()); ++r)
      std::cout << "kappa" << fmt(gm_table_value(t.get(), r, 0)) << " = " << fmt(gm_table_value(t.get(), r, 1)) << "  "
                << gm_table_text(t.get(), r, 0) << "  root " << fmt(gm_table_value(t.get(), r, 4)) << "\n";
    run.write(t.get(), "stability.csv");
    return kExitOk;
  };
  h["threshold"] = [](Run& run, const Options& o, gm_model* m) {
    Profile base;
    parse_profile(m, o.u0, base);
    gm_threshold_options to = threshold_options(o);
    Threshold th;
    check(gm_find_threshold(m, base.get(), &to, th.out()));
    report_threshold(run, th.get(), "threshold");
    if (o.hover > 0) {
      double lo = 0, hi = 0;
      int all_extinct = 0;
      check(gm_threshold_bracket(th.get(), &lo, &hi, &all_extinct));
      if (!all_extinct) {
        Table hv;
        check(gm_hover(m, base.get(), lo + (hi - lo) / 2, o.hover, o.step, o.every, hv.out()));
        run.write(hv.get(), "hover.csv");
        std::cout << "hover_duration = " << gm_table_note(hv.get(), "hover_duration") << "\n";
      }
    }
    return kExitOk;
  };
  h["sweep"] = [](Run& run, const Options& o, gm_model* m) {
    Profile base;
    parse_profile(m, o.u0, base);
    std::vector<double> ls;
    if (o.random > 0) {
      // splitmix64, so the draws do not depend on the standard library
      unsigned long long x = o.seed;
      for (int i = 0; i < o.random; ++i) {
        unsigned long long z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        ls.push_back(o.from + (o.to - o.from) * static_cast<double>(z >> 11) * 0x1.0p-53);
      }
    } else {
      for (int i = 0; i < o.count; ++i)
        ls.push_back(o.count == 1 ? o.from : o.from + (o.to - o.from) * i / (o.count - 1));
    }
    gm_threshold_options to = threshold_options(o);
    Table t;
    check(gm_sweep(m, base.get(), ls.data(), ls.size(), &to, o.threads, t.out()));
    run.write(t.get(), "sweep.csv");
    double inv = note_number(t.get(), "inversions");
    std::cout << "inversions = " << fmt(inv) << "\n";
    return inv > 0 ? kExitNumerical : kExitOk;
  };
  h["noncompact"] = [](Run& run, const Options& o, gm_model* m) {
    Table t;
    if (o.mode == "equilibria") {
      check(gm_coupled_equilibria(m, t.out()));
    } else if (o.mode == "solve") {
      check(gm_coupled_solve(m, o.alpha, o.phi, o.T, o.step, o.strict ? 1 : 0, t.out()));
    } else if (o.mode == "equivalence") {
      Profile u0;
      parse_profile(m, o.u0, u0);
      check(gm_equivalence(m, u0.get(), o.T, o.step, o.coupled_step, t.out()));
    } else if (o.mode == "threshold") {
      gm_threshold_options to = threshold_options(o);
      Threshold th;
      check(gm_coupled_threshold(m, &to, th.out()));
      report_threshold(run, th.get(), "noncompact_threshold");
      return kExitOk;
    } else {
      throw Failure{GM_E_CONFIG, "unknown noncompact mode '" + o.mode + "'"};
    }
    run.write(t.get(), "noncompact_" + o.mode + ".csv");
    print_notes(t.get());
    return kExitOk;
  };
  h["delay-compare"] = [](Run& run, const Options& o, gm_model* m) {
    Profile u0;
    parse_profile(m, o.u0, u0);
    Table t;
    check(gm_delay_compare(m, u0.get(), o.T, o.step, t.out()));
    run.write(t.get(), "delay.csv");
    print_notes(t.get());
    return kExitOk;
  };
  return h;
}

struct Defaults {
  double T;
  const char* u0;
  const char* about;
};

const std::map<std::string, Defaults> kDefaults = {
    {"validate", {0, "", "check a model config"}},
    {"simulate", {100, "step:0,3,1", "birth flux b(t)"}},
    {"density", {20, "step:0,3,1", "age density snapshot"}},
    {"norms", {100, "step:0,3,1", "L1 norms over time"}},
    {"stability", {0, "", "stability of the positive equilibria"}},
    {"threshold", {200, "step:0,3,1", "bisect for the threshold along lambda psi"}},
    {"sweep", {200, "step:0,3,1", "fates over a set of lambdas"}},
    {"noncompact", {200, "exp:1.5,0.5", "coupled (I, b) system"}},
    {"delay-compare", {100, "exp:1.5,0.5", "delay form against the full model"}},
};

int run_main(std::vector<std::string> args);

// Resolved value of a recorded option, written to the manifest under its long name.
using Recorded = std::vector<std::pair<std::string, std::function<ordered_json()>>>;

Recorded add_options(CLI::App* sub, const std::string& name, Options& o) {
  Recorded rec;
  auto num = [&](const char* flags, double& v, const char* help) {
    CLI::Option* opt = sub->add_option(flags, v, help);
    rec.emplace_back(opt->get_name().substr(2), [&v] { return ordered_json(fmt(v)); });
    return opt;
  };
  auto text = [&](const char* flags, std::string& v, const char* help) {
    CLI::Option* opt = sub->add_option(flags, v, help);
    rec.emplace_back(opt->get_name().substr(2), [&v] { return ordered_json(v); });
    return opt;
  };
  auto integer = [&](const char* flags, auto& v, const char* help) {
    CLI::Option* opt = sub->add_option(flags, v, help);
    rec.emplace_back(opt->get_name().substr(2), [&v] { return ordered_json(std::to_string(v)); });
    return opt;
  };
  auto flag = [&](const char* flags, bool& v, const char* help) {
    CLI::Option* opt = sub->add_flag(flags, v, help);
    rec.emplace_back(opt->get_name().substr(2), [&v] { return ordered_json(v); });
    return opt;
  };
  sub->add_option("--out-dir", o.out_dir, "directory for CSV outputs and the manifest");
  text("-c,--config", o.config, "model configuration (INI)")->required();
  if (name == "validate" || name == "stability") return rec;
  num("--T", o.T, "horizon");
  num("--step", o.step, "grid step; 0 selects the model default");
  text("--u0", o.u0, "initial profile, e.g. step:0,3,1 or exp:1.5,0.5");
  if (name == "simulate") flag("--cumulative", o.cumulative, "solve for B and report the bound");
  if (name == "density") num("--at", o.at, "node time of the snapshot (default T)");
  if (name == "norms" || name == "threshold") num("--every", o.every, "sampling interval");
  if (name == "threshold" || name == "sweep" || name == "noncompact") {
    num("--width", o.width, "bracket width");
    flag("--no-confirm", o.no_confirm, "skip the half-step confirmation of each verdict");
    flag("--no-trap", o.no_trap, "always run to the full horizon");
  }
  if (name == "threshold") num("--hover", o.hover, "long-run horizon at the bracket midpoint");
  if (name == "sweep") {
    num("--from", o.from, "first lambda");
    num("--to", o.to, "last lambda");
    integer("--count", o.count, "grid size")->check(CLI::PositiveNumber);
    integer("--random", o.random, "draw this many lambdas uniformly instead of a grid");
    integer("--seed", o.seed, "seed for --random");
    integer("--threads", o.threads, "worker threads; 0 uses all cores");
  }
  if (name == "noncompact") {
    text("--mode", o.mode, "solve, threshold, equivalence or equilibria")
        ->check(CLI::IsMember({"solve", "threshold", "equivalence", "equilibria"}));
    num("--alpha", o.alpha, "I(0) for solve");
    num("--phi", o.phi, "constant history for solve");
    flag("--strict", o.strict, "reject states with a jump at 0");
    num("--coupled-step", o.coupled_step, "coupled step for equivalence");
  }
  return rec;
}

int replay(const std::string& manifest_path, const std::string& out_dir) {
  std::ifstream f(manifest_path, std::ios::binary);
  if (!f) throw Failure{GM_E_IO, "cannot open manifest '" + manifest_path + "'"};
  ordered_json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw Failure{GM_E_CONFIG, std::string("malformed manifest: ") + e.what()};
  }
  std::vector<std::string> args{j.at("subcommand").get<std::string>(), "--out-dir", out_dir};
  for (const auto& [key, value] : j.at("parameters").items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back("--" + key);
    } else {
      args.push_back("--" + key);
      args.push_back(value.get<std::string>());
    }
  }
  std::string want = j.at("spec_hash").get<std::string>();
  Model m;
  std::string config = j.at("parameters").at("config").get<std::string>();
  if (j.at("subcommand") != "validate") {
    check(gm_model_load(config.c_str(), m.out()));
    if (want != gm_model_hash(m.get()))
      throw Failure{GM_E_INVALID, "config '" + config + "' no longer matches the manifest spec hash"};
  }
  return run_main(args);
}

int run_main(std::vector<std::string> args) {
  CLI::App app{"bistable age-structured population experiments"};
  app.require_subcommand(1);
  Options o;
  std::map<std::string, std::pair<CLI::App*, Recorded>> subs;
  for (const auto& [name, d] : kDefaults) {
    CLI::App* sub = app.add_subcommand(name, d.about);
    subs[name] = {sub, add_options(sub, name, o)};
  }
  std::string manifest_path, replay_out = ".";
  CLI::App* rp = app.add_subcommand("replay", "re-run a manifest");
  rp->add_option("manifest", manifest_path, "manifest written by an earlier run")->required();
  rp->add_option("--out-dir", replay_out, "directory for the re-run outputs");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (rp->parsed()) return replay(manifest_path, replay_out);

  for (auto& [name, entry] : subs) {
    if (!entry.first->parsed()) continue;
    const Defaults& d = kDefaults.at(name);
    if (o.T == 0) o.T = d.T;
    if (o.u0.empty()) o.u0 = d.u0;
    Run run;
    run.subcommand = name;
    run.out_dir = o.out_dir;
    run.config = o.config;
    std::error_code ec;
    fs::create_directories(run.out_dir, ec);
    if (ec) throw Failure{GM_E_IO, "cannot create '" + o.out_dir + "'"};
    // Resolved values, so a replay does not depend on the defaults above.
    for (const auto& [key, value] : entry.second) run.params[key] = value();
    if (name == "validate") return cmd_validate(run, o);
    Model m;
    check(gm_model_load(o.config.c_str(), m.out()));
    run.spec_hash = gm_model_hash(m.get());
    int code = handlers().at(name)(run, o, m.get());
    run.manifest();
    return code;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run_main(args);
  } catch (const Failure& f) {
    std::cerr << "gmlab: " << gm_status_name(f.status) << ": " << f.message << "\n";
    return exit_code(f.status);
  }
}
