#pragma once

// Method-of-steps integration of
//   x'(t) + p(t) x(tau(t)) = 0,   x(theta_k) = lambda_k x(theta_{k-l}^-)
// and of the nonimpulsive companion problems
//   y'(t) + q(t) y(sigma(t)) = 0.
//
// Both use the explicit trapezoidal (Heun) scheme on a grid that contains
// every impulse time / breakpoint. At the end of a step the right-hand side is
// evaluated as a left limit; at the start as a right limit.

#include <cstddef>
#include <vector>

#include "ride/core.hpp"

namespace ride::solver {

struct SolveConfig {
  double step = 1e-3;
  double horizon = 0.0;
  double tol_impulse = 1e-9;
  int picard_iters = 2;

  void validate(double t0) const;
};

/// y'(t) + q(t) y(sigma(t)) = 0 with y = phi on [history_start, t0].
struct PlainProblem {
  SidedFn q;
  SidedFn sigma;
  /// May jump at `history_breaks`; y(t0) is phi(t0, left).
  SidedFn phi;
  double t0 = 0.0;
  double history_start = 0.0;
  /// Times in (t0, horizon] the grid must hit.
  std::vector<double> breakpoints;
  /// Times in (history_start, t0) where phi may be two-sided.
  std::vector<double> history_breaks;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

Trajectory solve_impulsive(const DelaySpec& spec, const ImpulseSchedule& sched,
                           const InitialData& init, const SolveConfig& cfg);

Trajectory solve_plain(const PlainProblem& problem, const SolveConfig& cfg);

/// Convenience form with continuous coefficient, argument and history.
Trajectory solve_plain(const ScalarFn& q, const ScalarFn& sigma, const ScalarFn& phi,
                       double history_start, double t0, const SolveConfig& cfg);

/// Largest |x(theta_k) - lambda_k x(theta_{k-l}^-)| over the impulses on the
/// trajectory (reference values before the first grid point come from phi).
double impulse_residual(const Trajectory& traj, const ImpulseSchedule& sched,
                        const ScalarFn& phi);

}  // namespace ride::solver
