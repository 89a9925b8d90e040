#include "gmlab/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace gm {

namespace pt = boost::property_tree;

namespace {

[[noreturn]] void bad(const std::string& what) { fail(ErrorCode::Config, "config: " + what); }

Real parse_real(const std::string& key, const std::string& s) {
  errno = 0;
  char* end = nullptr;
  Real v = std::strtold(s.c_str(), &end);
  while (end && (*end == ' ' || *end == '\t')) ++end;
  if (s.empty() || errno != 0 || !end || *end != '\0' || !std::isfinite(v))
    bad("'" + key + "' is not a finite number: '" + s + "'");
  return v;
}

std::vector<Real> parse_list(const std::string& key, const std::string& s) {
  std::string t = s;
  for (char& c : t)
    if (c == ',') c = ' ';
  std::istringstream is(t);
  std::vector<Real> out;
  std::string tok;
  while (is >> tok) out.push_back(parse_real(key, tok));
  return out;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  bad("'" + key + "' must be true or false");
}

class Section {
 public:
  Section(const pt::ptree& root, const std::string& name, std::set<std::string> allowed, bool required = true)
      : name_(name) {
    auto it = root.find(name);
    if (it == root.not_found()) {
      if (required) bad("missing section [" + name + "]");
      return;
    }
    tree_ = &it->second;
    for (const auto& kv : *tree_)
      if (!allowed.count(kv.first)) bad("unknown key '" + kv.first + "' in [" + name + "]");
  }

  bool has(const std::string& key) const { return tree_ && tree_->find(key) != tree_->not_found(); }
  std::string text(const std::string& key) const {
    if (!has(key)) bad("missing key '" + key + "' in [" + name_ + "]");
    return tree_->get<std::string>(key);
  }
  Real real(const std::string& key) const { return parse_real(key, text(key)); }
  std::vector<Real> list(const std::string& key) const { return has(key) ? parse_list(key, text(key)) : std::vector<Real>{}; }

 private:
  std::string name_;
  const pt::ptree* tree_ = nullptr;
};

std::string render(Real v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.21Lg", v);
  return buf;
}

std::string render(const std::vector<Real>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + render(v[i]);
  return s;
}

std::vector<BirthRate::Interval> intervals(const Section& s, std::ostringstream& canon) {
  auto lo = s.list("lo"), hi = s.list("hi"), val = s.list("value");
  if (lo.size() != hi.size() || lo.size() != val.size())
    bad("[birth_rate] lo, hi and value need the same number of entries");
  std::vector<BirthRate::Interval> out;
  for (std::size_t i = 0; i < lo.size(); ++i) out.push_back({lo[i], hi[i], val[i]});
  canon << "beta.lo=" << render(lo) << "\nbeta.hi=" << render(hi) << "\nbeta.value=" << render(val) << "\n";
  return out;
}

// Error codes other than Config from the model constructors stay what they
// are; a validation failure is not a syntax error.
template <class F>
auto build(const std::string& what, F&& make) {
  try {
    return make();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) bad(what + ": " + e.what());
    throw;
  }
}

}  // namespace

ModelConfig parse_model_config(const std::string& text) {
  pt::ptree root;
  try {
    std::istringstream is(text);
    pt::read_ini(is, root);
  } catch (const pt::ini_parser_error& e) {
    bad(std::string("malformed INI: ") + e.what());
  }
  for (const auto& kv : root)
    if (kv.first != "mortality" && kv.first != "birth_rate" && kv.first != "birth_function" && kv.first != "model")
      bad("unknown section [" + kv.first + "]");

  std::ostringstream canon;
  Section ms(root, "mortality", {"breaks", "values"});
  auto breaks = ms.list("breaks"), values = ms.list("values");
  if (values.empty()) bad("[mortality] needs values");
  canon << "mu.breaks=" << render(breaks) << "\nmu.values=" << render(values) << "\n";
  MortalityRate mu = build("mortality", [&] {
    return breaks.empty() && values.size() == 1 ? MortalityRate::constant(values[0])
                                                : MortalityRate::piecewise(breaks, values);
  });

  Section bs(root, "birth_rate", {"kind", "lo", "hi", "value", "a0", "beta_inf", "normalize"});
  std::string kind = bs.text("kind");
  bool normalize = bs.has("normalize") && parse_bool("normalize", bs.text("normalize"));
  canon << "beta.kind=" << kind << "\n";
  auto iv = intervals(bs, canon);
  BirthRate beta = build("birth_rate", [&] {
    if (kind == "compact") {
      if (bs.has("a0") || bs.has("beta_inf")) bad("compact birth rate takes no a0 or beta_inf");
      return BirthRate::compact(iv);
    }
    if (kind == "eventually_constant") {
      Real a0 = bs.real("a0"), binf = bs.real("beta_inf");
      canon << "beta.a0=" << render(a0) << "\nbeta.beta_inf=" << render(binf) << "\n";
      return BirthRate::eventually_constant(iv, a0, binf);
    }
    bad("[birth_rate] kind must be compact or eventually_constant");
  });
  canon << "beta.normalize=" << (normalize ? "true" : "false") << "\n";
  if (normalize) beta = build("birth_rate", [&] { return normalize_birth_rate(beta, mu); });

  Section fs(root, "birth_function", {"kind", "A", "B", "x", "y"});
  std::string fkind = fs.text("kind");
  canon << "f.kind=" << fkind << "\n";
  BirthFunction f = build("birth_function", [&] {
    if (fkind == "hill") {
      if (fs.has("x") || fs.has("y")) bad("hill birth function takes A and B only");
      Real A = fs.real("A"), B = fs.real("B");
      canon << "f.A=" << render(A) << "\nf.B=" << render(B) << "\n";
      return BirthFunction::hill(A, B);
    }
    if (fkind == "table") {
      if (fs.has("A") || fs.has("B")) bad("table birth function takes x and y only");
      auto x = fs.list("x"), y = fs.list("y");
      canon << "f.x=" << render(x) << "\nf.y=" << render(y) << "\n";
      return BirthFunction::table(x, y);
    }
    bad("[birth_function] kind must be hill or table");
  });

  Section gs(root, "model", {"norm_tolerance"}, false);
  Real tol = gs.has("norm_tolerance") ? gs.real("norm_tolerance") : kClosedFormNormTolerance;
  if (!(tol > 0)) bad("norm_tolerance must be positive");
  canon << "model.norm_tolerance=" << render(tol) << "\n";
  return ModelConfig{std::move(mu), std::move(beta), std::move(f), tol, canon.str()};
}

ModelConfig load_model_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Config, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model_config(ss.str());
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace gm
