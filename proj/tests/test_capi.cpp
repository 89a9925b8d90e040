#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "gmlab/gmlab.h"

#ifndef GM_CONFIG_DIR
#error "GM_CONFIG_DIR must point at the sample configs"
#endif

namespace {

std::string config(const char* name) { return std::string(GM_CONFIG_DIR) + "/" + name; }

struct Model {
  gm_model* m = nullptr;
  explicit Model(const char* name) { REQUIRE(gm_model_load(config(name).c_str(), &m) == GM_OK); }
  ~Model() { gm_model_free(m); }
};

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(gm_version()) == "1.0.0");
  CHECK(std::string(gm_status_name(GM_OK)) != "");
  CHECK(std::string(gm_status_name(GM_E_NOT_BISTABLE)) != std::string(gm_status_name(GM_E_CONFIG)));
}

TEST_CASE("loading models") {
  Model ref("reference.ini");
  gm_model_info info;
  REQUIRE(gm_model_get_info(ref.m, &info) == GM_OK);
  CHECK(info.kappa1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(info.kappa2 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(info.compact == 1);
  CHECK(info.a_star == 3);
  CHECK(std::abs(info.normalization - 1) < 1e-10);
  CHECK(std::string(gm_model_hash(ref.m)) == "7d8ed92149e5a8d7");

  gm_model* bad = nullptr;
  CHECK(gm_model_load(config("not_bistable.ini").c_str(), &bad) == GM_E_NOT_BISTABLE);
  CHECK(bad == nullptr);
  CHECK(std::string(gm_last_error()).find("not bistable") != std::string::npos);
  CHECK(gm_model_parse("[mortality]\nvalues = x\n", &bad) == GM_E_CONFIG);
  CHECK(gm_model_load("/nonexistent.ini", &bad) == GM_E_CONFIG);
  CHECK(gm_model_parse(nullptr, &bad) == GM_E_INVALID);
}

TEST_CASE("validation table") {
  gm_table* t = nullptr;
  int ok = 0;
  REQUIRE(gm_validate_file(config("not_bistable.ini").c_str(), &t, &ok) == GM_OK);
  CHECK(ok == 0);
  CHECK(gm_table_rows(t) > 0);
  CHECK(gm_table_text_columns(t) == 2);
  CHECK(std::string(gm_table_column_name(t, 0)) == "passed");
  CHECK(gm_table_note(t, "spec_hash") != nullptr);
  gm_table_free(t);
  REQUIRE(gm_validate_file(config("reference.ini").c_str(), &t, &ok) == GM_OK);
  CHECK(ok == 1);
  gm_table_free(t);
}

TEST_CASE("simulation through the C interface") {
  Model ref("reference.ini");
  gm_profile* eq = nullptr;
  REQUIRE(gm_profile_equilibrium(ref.m, 2, &eq) == GM_OK);
  CHECK(std::abs(gm_profile_l1(eq) - 4) < 1e-12);
  gm_trajectory* tr = nullptr;
  REQUIRE(gm_simulate(ref.m, eq, 30, 0, 1, &tr) == GM_OK);
  gm_table* t = nullptr;
  REQUIRE(gm_trajectory_table(tr, &t) == GM_OK);
  long b = gm_table_find(t, "b");
  REQUIRE(b >= 0);
  CHECK(gm_table_find(t, "B") >= 0);
  CHECK(gm_table_find(t, "nope") == -1);
  for (std::size_t i = 0; i < gm_table_rows(t); ++i)
    CHECK(std::abs(gm_table_value(t, i, static_cast<std::size_t>(b)) - 2) < 1e-10);
  gm_table_free(t);

  REQUIRE(gm_norms(ref.m, eq, tr, 10, &t) == GM_OK);
  long d2 = gm_table_find(t, "dist2");
  REQUIRE(d2 >= 0);
  CHECK(gm_table_value(t, gm_table_rows(t) - 1, static_cast<std::size_t>(d2)) < 1e-9);
  gm_table_free(t);

  CHECK(gm_simulate(ref.m, eq, 30, 10, 0, &tr) == GM_E_CONTRACTION);
  gm_trajectory_free(tr);
  gm_profile_free(eq);
}

TEST_CASE("threshold and csv output") {
  Model ref("reference.ini");
  gm_profile* psi = nullptr;
  REQUIRE(gm_profile_step(0, 3, 1, &psi) == GM_OK);
  gm_threshold_options o;
  gm_threshold_defaults(&o);
  CHECK(o.width == 1e-3);
  gm_threshold* th = nullptr;
  REQUIRE(gm_find_threshold(ref.m, psi, &o, &th) == GM_OK);
  double lo = 0, hi = 0;
  int none = 1;
  REQUIRE(gm_threshold_bracket(th, &lo, &hi, &none) == GM_OK);
  CHECK(none == 0);
  CHECK(hi - lo <= 1e-3);
  CHECK(lo > 0.4);
  CHECK(hi < 0.7);

  gm_table* log = nullptr;
  REQUIRE(gm_threshold_log(th, &log) == GM_OK);
  CHECK(std::string(gm_table_note(log, "inversions")) == "0");
  std::string path = "capi_threshold_log.csv";
  REQUIRE(gm_table_write_csv(log, path.c_str()) == GM_OK);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header.find("lambda") != std::string::npos);
  std::remove(path.c_str());
  CHECK(gm_table_write_csv(log, "/nonexistent/dir/x.csv") == GM_E_IO);
  gm_table_free(log);
  gm_threshold_free(th);

  // compact models have no coupled form
  CHECK(gm_coupled_threshold(ref.m, &o, &th) == GM_E_INVALID);
  gm_profile_free(psi);
}

TEST_CASE("coupled and delay runs") {
  Model tail("tail_reference.ini");
  gm_table* t = nullptr;
  REQUIRE(gm_coupled_equilibria(tail.m, &t) == GM_OK);
  CHECK(gm_table_rows(t) == 3);
  gm_table_free(t);
  CHECK(gm_coupled_solve(tail.m, 0.3, 1.7, 5, 0, 1, &t) == GM_E_INCOMPATIBLE);
  REQUIRE(gm_coupled_solve(tail.m, 0.3, 1.7, 5, 0, 0, &t) == GM_OK);
  gm_table_free(t);

  gm_profile* u0 = nullptr;
  REQUIRE(gm_profile_exponential(1.5, 0.5, &u0) == GM_OK);
  REQUIRE(gm_delay_compare(tail.m, u0, 10, 1.0 / 16, &t) == GM_OK);
  long dev = gm_table_find(t, "deviation");
  REQUIRE(dev >= 0);
  for (std::size_t i = 0; i < gm_table_rows(t); ++i) CHECK(gm_table_value(t, i, static_cast<std::size_t>(dev)) < 1e-3);
  gm_table_free(t);
  gm_profile_free(u0);
}
