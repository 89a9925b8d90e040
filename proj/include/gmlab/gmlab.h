/* C interface to the age-structured bistable population solvers.
 *
 * All objects are opaque and owned by the caller once returned; free them with
 * the matching gm_*_free. Every call returns a gm_status; on failure
 * gm_last_error() holds a message for the calling thread. Numbers cross the
 * boundary as double; the solvers work in extended precision internally. */
#ifndef GMLAB_H
#define GMLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GM_API __declspec(dllexport)
#else
#define GM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gm_status {
  GM_OK = 0,
  GM_E_INVALID = 1,      /* bad argument */
  GM_E_CONFIG = 2,       /* malformed configuration */
  GM_E_NOT_BISTABLE = 3, /* model fails an assumption check */
  GM_E_DOMAIN = 4,
  GM_E_CONTRACTION = 5,  /* step too large for the implicit update */
  GM_E_INCOMPATIBLE = 6, /* history with a jump at 0 */
  GM_E_COMPARISON = 7,   /* fate verdicts out of order in lambda */
  GM_E_IO = 8,
  GM_E_INTERNAL = 9
} gm_status;

typedef struct gm_model gm_model;
typedef struct gm_profile gm_profile;
typedef struct gm_trajectory gm_trajectory;
typedef struct gm_threshold gm_threshold;
typedef struct gm_table gm_table;

GM_API const char* gm_version(void);
GM_API const char* gm_last_error(void);
GM_API const char* gm_status_name(gm_status s);

/* ---- tables: text columns first, then numeric columns, plus key/value notes */
GM_API void gm_table_free(gm_table* t);
GM_API size_t gm_table_rows(const gm_table* t);
GM_API size_t gm_table_text_columns(const gm_table* t);
GM_API size_t gm_table_columns(const gm_table* t);
GM_API const char* gm_table_text_name(const gm_table* t, size_t col);
GM_API const char* gm_table_column_name(const gm_table* t, size_t col);
GM_API const char* gm_table_text(const gm_table* t, size_t row, size_t col);
GM_API double gm_table_value(const gm_table* t, size_t row, size_t col);
/* Index of a numeric column by name, or -1. */
GM_API long gm_table_find(const gm_table* t, const char* name);
GM_API size_t gm_table_notes(const gm_table* t);
GM_API const char* gm_table_note_key(const gm_table* t, size_t i);
GM_API const char* gm_table_note_value(const gm_table* t, size_t i);
/* Note value by key, or NULL. */
GM_API const char* gm_table_note(const gm_table* t, const char* key);
/* CSV with a header row; numbers in %.17g. */
GM_API gm_status gm_table_write_csv(const gm_table* t, const char* path);

/* ---- model */
GM_API gm_status gm_model_load(const char* ini_path, gm_model** out);
GM_API gm_status gm_model_parse(const char* ini_text, gm_model** out);
GM_API void gm_model_free(gm_model* m);
/* FNV-1a 64 hash of the canonical model text, as 16 hex digits. */
GM_API const char* gm_model_hash(const gm_model* m);
GM_API const char* gm_model_canonical(const gm_model* m);

typedef struct gm_model_info {
  double kappa1, kappa2;
  double mu_lower, beta_upper, lipschitz;
  double max_step, default_step;
  int compact;          /* 1 for compact support, 0 for the eventually-constant kind */
  double a_star;        /* infinite for the eventually-constant kind */
  double a0, beta_inf;  /* eventually-constant kind only */
  double normalization;
} gm_model_info;

GM_API gm_status gm_model_get_info(const gm_model* m, gm_model_info* out);

/* Runs every check on a config without requiring it to pass. Rows: name, detail | passed, value.
 * *all_passed is set to 1 when every check passes. */
GM_API gm_status gm_validate_file(const char* ini_path, gm_table** checks, int* all_passed);

/* ---- initial distributions */
GM_API gm_status gm_profile_step(double lo, double hi, double value, gm_profile** out);
GM_API gm_status gm_profile_exponential(double c, double k, gm_profile** out);
GM_API gm_status gm_profile_equilibrium(const gm_model* m, int which, gm_profile** out);
GM_API gm_status gm_profile_samples(double h, const double* values, size_t n, gm_profile** out);
GM_API gm_status gm_profile_sum(const gm_profile* a, const gm_profile* b, gm_profile** out);
GM_API gm_status gm_profile_scaled(const gm_profile* p, double factor, gm_profile** out);
GM_API void gm_profile_free(gm_profile* p);
GM_API double gm_profile_l1(const gm_profile* p);

/* ---- birth flux */
/* step <= 0 selects the model default. With cumulative != 0 B is solved and b = f(B). */
GM_API gm_status gm_simulate(const gm_model* m, const gm_profile* u0, double T, double step, int cumulative,
                             gm_trajectory** out);
GM_API void gm_trajectory_free(gm_trajectory* t);
GM_API size_t gm_trajectory_size(const gm_trajectory* t);
GM_API double gm_trajectory_step(const gm_trajectory* t);
/* Columns t, b and, for cumulative runs, B. */
GM_API gm_status gm_trajectory_table(const gm_trajectory* t, gm_table** out);
/* Boundedness estimate and trailing limits; one row. Needs a cumulative trajectory. */
GM_API gm_status gm_bound_report(const gm_model* m, const gm_profile* u0, const gm_trajectory* t, gm_table** out);

/* Age density at node time `at`: columns a, u_left, u_right; notes tail_mass, interface_jump. */
GM_API gm_status gm_density(const gm_model* m, const gm_profile* u0, const gm_trajectory* t, double at,
                            gm_table** out);
/* Every `every` time units: t, b, l1, dist0, dist1, dist2. */
GM_API gm_status gm_norms(const gm_model* m, const gm_profile* u0, const gm_trajectory* t, double every,
                          gm_table** out);

/* which, kappa, slope, stable, root */
GM_API gm_status gm_stability(const gm_model* m, gm_table** out);

/* ---- thresholds along lambda * base */
typedef struct gm_threshold_options {
  double width;
  double T;
  double step; /* <= 0: model default */
  int confirm_half_step;
  int use_trap;
} gm_threshold_options;

GM_API void gm_threshold_defaults(gm_threshold_options* o);
GM_API gm_status gm_find_threshold(const gm_model* m, const gm_profile* base, const gm_threshold_options* o,
                                   gm_threshold** out);
/* Along lambda (c0 / mu_inf, 1) for the coupled system; eventually-constant models only. */
GM_API gm_status gm_coupled_threshold(const gm_model* m, const gm_threshold_options* o, gm_threshold** out);
GM_API void gm_threshold_free(gm_threshold* t);
/* all_extinct is 1 when no persistent lambda was found up to 2^20 (hi is then infinite). */
GM_API gm_status gm_threshold_bracket(const gm_threshold* t, double* lo, double* hi, int* all_extinct);
/* lambda, verdict (0 extinct, 1 undecided, 2 persistent), horizon, trailing_min, trailing_max; notes carry flags. */
GM_API gm_status gm_threshold_log(const gm_threshold* t, gm_table** out);

/* Long run at one lambda; samples t, b, l1, dist0, dist1, dist2 and hover notes. */
GM_API gm_status gm_hover(const gm_model* m, const gm_profile* base, double lambda, double T_long, double step,
                          double every, gm_table** out);

/* Fates over lambdas; rows sorted by lambda. threads = 0 picks the hardware count. */
GM_API gm_status gm_sweep(const gm_model* m, const gm_profile* base, const double* lambdas, size_t n,
                          const gm_threshold_options* o, unsigned threads, gm_table** out);

/* ---- coupled (I, b) system */
/* rows which, I, b */
GM_API gm_status gm_coupled_equilibria(const gm_model* m, gm_table** out);
/* Constant history phi on [-a0, 0] and I(0) = alpha; strict rejects incompatible states. Columns t, I, b. */
GM_API gm_status gm_coupled_solve(const gm_model* m, double alpha, double phi, double T, double step, int strict,
                                  gm_table** out);
/* coupled_step <= 0 uses step. Columns t, b_full, b_coupled, I_full, I_coupled. */
GM_API gm_status gm_equivalence(const gm_model* m, const gm_profile* u0, double T, double step,
                                double coupled_step, gm_table** out);

/* ---- delay form */
/* Columns t, U_delay, U_characteristics, deviation = |U_delay - U_characteristics|, U_coupled. */
GM_API gm_status gm_delay_compare(const gm_model* m, const gm_profile* u0, double T, double step, gm_table** out);

#ifdef __cplusplus
}
#endif

#endif
