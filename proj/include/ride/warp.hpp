#pragma once

// Time warps between an impulsive equation with retarded impulses and its
// l+1 nonimpulsive companions.
//
// For residue i in {0..l} the blocks [theta_{v(l+1)+i}, theta_{v(l+1)+i+1}),
// v >= -n, are glued end to end into a single timeline. The junction times
// vartheta_k^i are the glue points: alpha_i maps [vartheta_k, vartheta_{k+1})
// onto block k by a unit-slope shift, and beta_i is its inverse.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ride/core.hpp"
#include "ride/solver.hpp"

namespace ride::warp {

/// Which end of the product interval is closed.
enum class Bounds {
  open_closed,  // (s, t]
  closed_open,  // [s, t)
};

class WarpGrid {
 public:
  explicit WarpGrid(ImpulseSchedule schedule);

  const ImpulseSchedule& schedule() const noexcept { return sched_; }
  int residues() const noexcept { return sched_.period(); }
  long first_junction() const noexcept { return -sched_.n_history(); }
  long last_junction(int i) const;
  double vartheta(int i, long k) const;
  /// vartheta_k^i for k = -n .. K_i.
  std::span<const double> junctions(int i) const;

  /// theta_{v(l+1)+i}
  double block_start(int i, long v) const;
  /// theta_{v(l+1)+i+1}
  double block_end(int i, long v) const;

  double alpha(int i, double t, Side side = Side::right) const;
  double beta(int i, double t, Side side = Side::right) const;

  /// Residue class of the block containing t, blocks v >= -n. With Side::left
  /// a block end belongs to the block it closes.
  std::optional<int> residue_of(double t, Side side = Side::right) const;
  /// Indicator of the residue-i blocks with v >= 0.
  bool chi(int i, double t) const;

  /// Product of lambda_{j(l+1)+i} (reciprocals when inverted) over j >= 0
  /// with vartheta_j^i in the given interval. Use -infinity for s to take
  /// every junction up to t.
  double impulse_product(int i, double s, double t, bool inverted,
                         Bounds bounds = Bounds::open_closed) const;
  /// Same over block starts theta_{j(l+1)+i}, j >= 0, in real time.
  double real_product(int i, double s, double t, bool inverted = false,
                      Bounds bounds = Bounds::open_closed) const;

  /// Largest warped time whose image under alpha_i does not exceed `t`.
  double warped_horizon(int i, double t) const;
  /// Largest real time covered by the residue-i timeline when it is known
  /// up to warped time `s`.
  double real_extent(int i, double s) const;

 private:
  double product_over(std::span<const double> times, int i, double s, double t, bool inverted,
                      Bounds bounds) const;

  ImpulseSchedule sched_;
  std::vector<std::vector<double>> junctions_;    // [i][k + n]
  std::vector<std::vector<double>> starts_;       // [i][j], j >= 0
  std::vector<std::vector<double>> log_prefix_;   // [i][j] sum_{m<j} log|lambda|
  std::vector<std::vector<int>> neg_prefix_;      // [i][j] count of negatives
};

/// beta_i(tau(alpha_i(t))). Throws AssumptionViolation("A5") when tau leaves
/// the residue-i blocks.
double sigma(const WarpGrid& grid, int i, const ScalarFn& tau, double t, Side side = Side::right);

/// y_i(t) = [prod_{vartheta_j <= t} 1/lambda] x(alpha_i(t)) on the warped
/// timeline, sampled at the images of x's grid points.
Trajectory project(const WarpGrid& grid, const Trajectory& x, int i);

/// Largest |y_i(vartheta_k^+) - y_i(vartheta_k^-)| over junctions k >= 0
/// that the trajectory covers.
double junction_mismatch(const WarpGrid& grid, const Trajectory& x, int i);

struct Companion {
  int residue = 0;
  solver::PlainProblem problem;
  double horizon = 0.0;  // warped image of the real horizon
};

struct CompanionSystem {
  std::vector<Companion> companions;
};

CompanionSystem build_companions(const WarpGrid& grid, const DelaySpec& spec,
                                 const InitialData& init, double horizon);

/// x(t) = sum_mu chi_mu(t) [prod lambda over theta_{j(l+1)+mu} <= t] y_mu(beta_mu(t)).
/// Samples the images of the companion grids unless `times` is given.
Trajectory reconstruct(const WarpGrid& grid, std::span<const Trajectory> companions,
                       std::span<const double> times = {});

/// Coefficient and initial function of the impulsive equation assembled from
/// companion data.
struct AssembledEquation {
  SidedFn coefficient;
  SidedFn initial;
};

AssembledEquation build_impulsive_from_companions(const WarpGrid& grid, const ScalarFn& tau,
                                                  std::vector<SidedFn> q,
                                                  std::vector<SidedFn> phi);

struct ProductBound {
  double sup = 0.0;
  bool growing = false;
};

struct AssumptionReport {
  double horizon = 0.0;
  std::size_t samples = 0;

  bool a1_ok = true;
  std::optional<double> a1_witness;
  bool a2_ok = true;
  std::optional<double> a2_witness;
  bool a4_ok = true;
  bool a5_ok = true;
  std::optional<double> a5_witness;
  std::optional<int> a5_residue;
  std::string a5_detail;

  /// max |alpha_i(sigma_i(t)) - tau(alpha_i(t))| per residue (A6/A14).
  std::vector<double> a6_residual;
  /// max |sigma_i(beta_i(t)) - beta_i(tau(t))| per residue (A7/A15).
  std::vector<double> a7_residual;

  /// sup_t sum_k |prod 1/lambda| over (s, t] for s = theta_0 (A9) and over
  /// all sampled s (A10).
  ProductBound a9;
  ProductBound a10;
  /// Same with prod lambda over real block starts (A11, A12).
  ProductBound a11;
  ProductBound a12;

  bool passed() const noexcept { return a2_ok && a4_ok && a5_ok; }
};

AssumptionReport check_assumptions(const WarpGrid& grid, const DelaySpec& spec, double horizon,
                                   std::size_t samples);

}  // namespace ride::warp
