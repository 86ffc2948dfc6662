#pragma once

// Oscillation detection, the constant-coefficient oscillation and stability
// criteria, finite-horizon stability surrogates, and the numerical check that
// the impulsive equation and its companions agree.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ride/core.hpp"
#include "ride/solver.hpp"
#include "ride/warp.hpp"

namespace ride::analysis {

enum class Verdict { oscillatory, nonoscillatory, indeterminate };

/// "oscillatory", "nonoscillatory-on-horizon" or "indeterminate".
std::string to_string(Verdict v);

/// Half-open window [begin, end).
struct Interval {
  double begin;
  double end;
};

struct OscillationResult {
  Verdict verdict = Verdict::indeterminate;
  /// Times with x(xi^-) x(xi^+) <= 0, strictly increasing.
  std::vector<double> sign_changes;
  /// +1 / -1 when nonoscillatory.
  int eventual_sign = 0;
  std::string note;

  std::size_t count() const noexcept { return sign_changes.size(); }
};

/// Sign changes of `traj` on [t_min, end of trajectory]. With `restrict`
/// non-empty only the given windows are considered and they are glued end to
/// end, so a sign difference between the end of one window and the start of
/// the next counts as a change at the later start.
OscillationResult detect_oscillation(const Trajectory& traj, std::span<const Interval> restrict,
                                     double t_min, std::size_t min_changes, double floor = 0.0);

/// Blocks [theta_{v(l+1)+i}, theta_{v(l+1)+i+1}), v >= 0, clipped to [from, to].
std::vector<Interval> residue_windows(const warp::WarpGrid& grid, int i, double from, double to);

/// q * delay > 1/e.
bool criterion_one_over_e(double q, double delay);
/// 0 < q and q * delay <= pi/2.
bool criterion_pi_over_two(double q, double delay);

struct CriterionResult {
  int residue = 0;
  bool applicable = false;
  double q = 0.0;
  double delay = 0.0;
  bool one_over_e = false;
  bool pi_over_two = false;
  std::string note;
};

/// Criteria on each companion when p is constant and tau a shift, and the
/// companion coefficient and delay settle to constants on the second half
/// of its horizon.
std::vector<CriterionResult> evaluate_criteria(const warp::WarpGrid& grid, const DelaySpec& spec,
                                               const warp::CompanionSystem& companions);

// ---------------------------------------------------------------------------
// Stability surrogates

enum class Family { constant, ramp, cosine };
std::string to_string(Family f);

/// Family member with sup-norm 1 on [rho, start].
ScalarFn family_member(Family f, double rho, double start);

/// Something that can be solved from an arbitrary start time.
struct ProbeTarget {
  /// Solves from real start time `start`; phi lives on the target's own timeline.
  std::function<Trajectory(double start, const ScalarFn& phi)> solve;
  /// Start time on the target's timeline.
  std::function<double(double start)> local_start;
  /// Left end of the initial interval on the target's timeline.
  std::function<double(double start)> rho;
  double horizon = 0.0;
};

ProbeTarget impulsive_target(const DelaySpec& spec, const ImpulseSchedule& sched,
                             const solver::SolveConfig& cfg);
/// Start times passed to the target are real times; they are mapped onto
/// the companion's warped timeline.
ProbeTarget companion_target(const warp::WarpGrid& grid, const warp::Companion& companion,
                             const solver::SolveConfig& cfg);

struct StabilityRow {
  double eps = 0.0;
  double delta = 0.0;
  double start = 0.0;
  /// sup |x| over [start, T] at scale delta (worst family member).
  double sup_abs = 0.0;
  /// |x(T)| at scale delta (worst family member).
  double tail_abs = 0.0;
  /// max over members of sup |x| for unit initial functions.
  double amplification = 0.0;
  /// sup over the second half of [start, T] / sup over the first half.
  double growth_ratio = 0.0;
};

struct StabilityTable {
  std::vector<StabilityRow> rows;
  bool stable = false;
  bool uniform = false;
  bool asymptotic = false;
  double tail_tol = 1e-3;
};

StabilityTable probe_stability(const ProbeTarget& target, std::span<const double> start_times,
                               std::span<const double> eps_list, double tail_tol,
                               std::size_t threads = 1);

// ---------------------------------------------------------------------------
// Full analysis

struct Setup {
  DelaySpec spec;
  ImpulseSchedule sched;
  InitialData init;
};

struct Options {
  solver::SolveConfig solve;
  std::optional<double> t_min;
  std::size_t min_changes = 5;
  double floor = 0.0;
  std::vector<double> eps_list{1e-3, 1e-2, 1e-1};
  std::vector<double> start_times;
  double tail_tol = 1e-3;
  std::size_t assumption_samples = 400;
  std::size_t threads = 1;
};

/// Position of real time t on the residue-i timeline: beta_i(t) inside a
/// residue-i block, else the end of the last residue-i block before t.
double warped_position(const warp::WarpGrid& grid, int i, double t);

/// Default burn-in: theta_0 + 5 * (largest sampled t - tau(t)).
double default_t_min(const Setup& setup, double horizon);

struct Solutions {
  warp::WarpGrid grid;
  warp::CompanionSystem companions;
  Trajectory impulsive;
  std::vector<Trajectory> companion_paths;
};

/// Solves the impulsive problem and, independently, every companion.
/// Throws AssumptionViolation when A2/A4/A5 fail.
Solutions solve_all(const Setup& setup, const Options& options);

struct ResidueEquivalence {
  int residue = 0;
  double projection_deviation = 0.0;
  double projection_scale = 0.0;
  double junction_mismatch = 0.0;
  OscillationResult impulsive;
  OscillationResult companion;
  bool verdicts_agree = false;
};

struct EquivalenceReport {
  double reconstruction_deviation = 0.0;
  double reconstruction_scale = 0.0;
  std::vector<ResidueEquivalence> residues;
  bool positive_factors = true;
  /// Verdict of the impulsive solution over all of [t_min, T].
  Verdict direct = Verdict::indeterminate;
  /// Verdict inferred from the companions.
  Verdict inferred = Verdict::indeterminate;
  std::string inference_rule;
  bool overall_agree = false;
  std::optional<bool> stable_agree;
  std::optional<bool> uniform_agree;
  std::optional<bool> asymptotic_agree;
};

EquivalenceReport verify_equivalence(const Setup& setup, const Solutions& solutions,
                                     const Options& options);

struct AnalysisReport {
  warp::AssumptionReport assumptions;
  double t_min = 0.0;
  OscillationResult oscillation;
  std::vector<CriterionResult> criteria;
  StabilityTable stability;
  std::vector<StabilityTable> companion_stability;
  EquivalenceReport equivalence;
};

AnalysisReport analyze(const Setup& setup, const Options& options);

}  // namespace ride::analysis
