#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gmlab/common.hpp"
#include "gmlab/model.hpp"
#include "gmlab/profile.hpp"
#include "gmlab/volterra.hpp"

namespace gm {

enum class Verdict { Extinct = 0, Undecided = 1, Persistent = 2 };

const char* verdict_name(Verdict v);

struct FateReport {
  Verdict verdict = Verdict::Undecided;
  Real trailing_min = 0, trailing_max = 0;
  Real first_above = -1;  // first t with b > kappa1 + tol, -1 if never
  Real first_below = -1;  // first t with b < kappa1 - tol, -1 if never
  Real horizon = 0;       // time actually simulated
  bool trapped = false;   // decided by the history-window trap
};

struct FateOptions {
  Real T = 200;
  Real step = 0;  // 0 selects the model default
  bool use_trap = true;
  /// Re-run at step/2 and report Undecided unless both runs agree.
  bool confirm_half_step = true;
};

/// Verdict from trailing statistics of b, or from the trap once the whole
/// memory window sits on one side of the kappa1 band.
FateReport classify_fate(const ModelSpec& spec, const InitialDistribution& u0, const FateOptions& opt);

/// Verdict of a finished trajectory (no trap), using the trailing quarter.
FateReport fate_of(const ModelSpec& spec, const Trajectory& traj);

/// lambda -> u_lambda; scaling of a base profile unless a custom monotone rule is given.
class MonotoneFamily {
 public:
  static MonotoneFamily scaling(const ModelSpec& spec, InitialDistribution base);
  /// Custom rule; the caller guarantees pointwise monotonicity in lambda and u_0 = 0.
  static MonotoneFamily custom(std::function<InitialDistribution(Real)> rule, std::string label);

  InitialDistribution at(Real lambda) const { return rule_(lambda); }
  const std::string& label() const { return label_; }

 private:
  MonotoneFamily(std::function<InitialDistribution(Real)> rule, std::string label)
      : rule_(std::move(rule)), label_(std::move(label)) {}
  std::function<InitialDistribution(Real)> rule_;
  std::string label_;
};

struct FateLogEntry {
  Real lambda;
  Verdict verdict;
  Real horizon;
  Real trailing_min, trailing_max;
};

enum class ThresholdKind { Bracket, AllExtinct };

struct ThresholdResult {
  ThresholdKind kind = ThresholdKind::Bracket;
  Real lo = 0, hi = 0;
  std::vector<FateLogEntry> log;
  bool horizon_doubled = false;
  bool accepted_undecided = false;  // stopped early on undecided probes
  Real final_horizon = 0;

  Real estimate() const { return lo + (hi - lo) / 2; }
  Real width() const { return hi - lo; }
};

/// Fate at parameter lambda with horizon T.
using FateFn = std::function<FateReport(Real lambda, Real T)>;

/// Doubling from 1 to find a persistent lambda, then bisection to width_tol.
/// Undecided midpoints are probed at mid -+ width/4; if both probes are
/// undecided the horizon is doubled once, after which the bracket is accepted.
ThresholdResult bisect_threshold(const FateFn& fate, Real width_tol, Real T);

ThresholdResult find_threshold(const ModelSpec& spec, const MonotoneFamily& family, Real width_tol,
                               const FateOptions& opt);

/// Throws ComparisonViolation when an extinct verdict sits above a persistent one.
void check_monotone(std::vector<FateLogEntry> log);
/// Number of pairs out of order in lambda, ranking extinct < undecided < persistent.
int count_inversions(std::vector<FateLogEntry> log);

struct HoverReport {
  Real lambda = 0;
  Real horizon = 0;
  Real transient = 0;
  Real band_lo = 0, band_hi = 0;
  Real exit_time = -1;  // first time after the transient b leaves the band; -1 if never
  Real hover_duration = 0;
  Real delta_est = 0;  // min distance of b to {0, kappa2} while hovering
  Real trailing_min = 0, trailing_max = 0;
  Real min_l1 = 0, max_l1 = 0;
  Real min_dist0 = 0, min_dist2 = 0;
  Real final_dist2 = 0;
  Trajectory trajectory;
  std::vector<Real> sample_t, l1, dist0, dist1, dist2;
};

/// Long run at lambda; b and the age-density norms are sampled every `every` time units.
HoverReport threshold_diagnostics(const ModelSpec& spec, const MonotoneFamily& family, Real lambda, Real T_long,
                                  Real step, Real every = 1);

struct SweepRow {
  Real lambda;
  FateReport fate;
};

/// Fates over a lambda grid, classified on `threads` worker threads; rows sorted by lambda.
std::vector<SweepRow> sweep(const ModelSpec& spec, const MonotoneFamily& family, std::vector<Real> lambdas,
                            const FateOptions& opt, unsigned threads = 0);

}  // namespace gm
