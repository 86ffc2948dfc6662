#pragma once

// Shared domain types: impulse schedules, delay specifications, initial data
// and two-sided trajectories.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ride {

/// Which one-sided limit to take at a discontinuity.
enum class Side { left, right };

using ScalarFn = std::function<double(double)>;
using SidedFn = std::function<double(double, Side)>;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A function could not be evaluated at `t`.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, double t);
  double t() const noexcept { return t_; }

 private:
  double t_;
};

/// A time argument lies outside the domain covered by an object.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// The impulse schedule does not reach an index an operation needs.
class ScheduleTooShort : public Error {
 public:
  explicit ScheduleTooShort(long needed_index);
  long needed_index() const noexcept { return needed_; }

 private:
  long needed_;
};

class InvalidSchedule : public Error {
 public:
  using Error::Error;
};

/// A standing assumption failed at a witness time.
class AssumptionViolation : public Error {
 public:
  AssumptionViolation(std::string assumption, const std::string& what, double witness);
  const std::string& assumption() const noexcept { return assumption_; }
  double witness() const noexcept { return witness_; }

 private:
  std::string assumption_;
  double witness_;
};

// ---------------------------------------------------------------------------
// Time functions

/// a*t + b, when a function is known to have that form.
struct AffineForm {
  double slope = 0.0;
  double intercept = 0.0;

  bool is_constant() const noexcept { return slope == 0.0; }
  bool is_shift() const noexcept { return slope == 1.0 && intercept <= 0.0; }
};

/// A scalar function of time with an optional structural annotation.
class TimeFunction {
 public:
  TimeFunction() = default;
  TimeFunction(ScalarFn fn, std::optional<AffineForm> affine = std::nullopt,
               std::string source = {});

  static TimeFunction constant(double c);
  /// t - delay
  static TimeFunction shift(double delay);

  double operator()(double t) const { return fn_(t); }
  const ScalarFn& fn() const noexcept { return fn_; }
  const std::optional<AffineForm>& affine() const noexcept { return affine_; }
  const std::string& source() const noexcept { return source_; }
  explicit operator bool() const noexcept { return static_cast<bool>(fn_); }

 private:
  ScalarFn fn_;
  std::optional<AffineForm> affine_;
  std::string source_;
};

// ---------------------------------------------------------------------------
// Schedule

/// Impulse times theta_k for k = -n(l+1) .. K_max and factors lambda_k for
/// k = 0 .. K_max. Index 0 is the initial time; negative indices are history
/// points without impulses.
class ImpulseSchedule {
 public:
  ImpulseSchedule(std::vector<double> theta, std::vector<double> lambda, int ell,
                  int n_history);

  /// theta_k = start + (k - first_index) * period with lambda cycled through
  /// `pattern` by k mod pattern.size(). Generated until theta exceeds `until`.
  static ImpulseSchedule uniform(double theta0, double period, std::span<const double> pattern,
                                 int ell, int n_history, double until);

  int ell() const noexcept { return ell_; }
  int period() const noexcept { return ell_ + 1; }
  int n_history() const noexcept { return n_history_; }
  long first_index() const noexcept { return -static_cast<long>(n_history_) * period(); }
  long last_index() const noexcept {
    return first_index() + static_cast<long>(theta_.size()) - 1;
  }

  double theta(long k) const;
  double lambda(long k) const;
  double theta0() const noexcept { return theta(0); }
  /// theta_{-n(l+1)}, the left end of the initial interval.
  double rho() const noexcept { return theta_.front(); }

  std::span<const double> times() const noexcept { return theta_; }
  std::span<const double> factors() const noexcept { return lambda_; }

  /// Largest k with theta_k <= t, or nullopt when t < rho().
  std::optional<long> index_at_or_before(double t) const;
  /// k when t == theta_k exactly.
  std::optional<long> index_of(double t) const;
  bool covers(double horizon) const noexcept { return theta_.back() > horizon; }

 private:
  std::vector<double> theta_;
  std::vector<double> lambda_;
  int ell_;
  int n_history_;
};

struct DelaySpec {
  TimeFunction p;
  TimeFunction tau;
};

struct InitialData {
  ScalarFn phi;
  double t0 = 0.0;
  double rho = 0.0;
};

// ---------------------------------------------------------------------------
// Trajectory

/// Right-continuous sampled solution with left limits stored separately.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::vector<double> grid, std::vector<double> values_left,
             std::vector<double> values_right, std::vector<std::size_t> impulse_marks);

  /// A continuous trajectory without impulse marks.
  static Trajectory continuous(std::vector<double> grid, std::vector<double> values);

  std::span<const double> grid() const noexcept { return grid_; }
  std::span<const double> values_left() const noexcept { return left_; }
  std::span<const double> values_right() const noexcept { return right_; }
  std::span<const std::size_t> impulse_marks() const noexcept { return marks_; }
  std::size_t size() const noexcept { return grid_.size(); }
  bool empty() const noexcept { return grid_.empty(); }
  double front_time() const { return grid_.front(); }
  double back_time() const { return grid_.back(); }
  bool is_impulse(std::size_t index) const;

  double evaluate(double t, Side side = Side::right) const;

 private:
  std::vector<double> grid_;
  std::vector<double> left_;
  std::vector<double> right_;
  std::vector<std::size_t> marks_;
};

/// Piecewise-linear dense output with two-sided values at grid points.
double evaluate(const Trajectory& traj, double t, Side side = Side::right);

/// Sampled infimum of tau on [t0, horizon].
double compute_rho(const ScalarFn& tau, double t0, double horizon, std::size_t samples);

/// Evenly spaced samples on [a, b] including both ends.
std::vector<double> linspace(double a, double b, std::size_t count);

}  // namespace ride
