#include "ride/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ride {

namespace {

std::string with_time(const std::string& what, double t) {
  std::ostringstream out;
  out.precision(17);
  out << what << " (t = " << t << ")";
  return out.str();
}

}  // namespace

EvaluationError::EvaluationError(const std::string& what, double t)
    : Error(with_time(what, t)), t_(t) {}

ScheduleTooShort::ScheduleTooShort(long needed_index)
    : Error("impulse schedule too short: index " + std::to_string(needed_index) +
            " is needed"),
      needed_(needed_index) {}

AssumptionViolation::AssumptionViolation(std::string assumption, const std::string& what,
                                         double witness)
    : Error(with_time(assumption + " violated: " + what, witness)),
      assumption_(std::move(assumption)),
      witness_(witness) {}

TimeFunction::TimeFunction(ScalarFn fn, std::optional<AffineForm> affine, std::string source)
    : fn_(std::move(fn)), affine_(affine), source_(std::move(source)) {}

TimeFunction TimeFunction::constant(double c) {
  return TimeFunction([c](double) { return c; }, AffineForm{0.0, c});
}

TimeFunction TimeFunction::shift(double delay) {
  return TimeFunction([delay](double t) { return t - delay; }, AffineForm{1.0, -delay});
}

// ---------------------------------------------------------------------------

ImpulseSchedule::ImpulseSchedule(std::vector<double> theta, std::vector<double> lambda,
                                 int ell, int n_history)
    : theta_(std::move(theta)), lambda_(std::move(lambda)), ell_(ell), n_history_(n_history) {
  if (ell_ < 0) throw InvalidSchedule("ell must be >= 0");
  if (n_history_ < 1) throw InvalidSchedule("n_history must be >= 1");
  const auto history = static_cast<std::size_t>(n_history_) * static_cast<std::size_t>(period());
  if (theta_.size() < history + 1) {
    throw InvalidSchedule("theta must list at least the " + std::to_string(history + 1) +
                          " points theta_{-n(l+1)} .. theta_0");
  }
  for (std::size_t j = 1; j < theta_.size(); ++j) {
    if (!(theta_[j] > theta_[j - 1])) {
      throw InvalidSchedule("theta must be strictly increasing (index " +
                            std::to_string(first_index() + static_cast<long>(j)) + ")");
    }
  }
  const auto impulses = theta_.size() - history;
  if (lambda_.size() < impulses) {
    throw InvalidSchedule("lambda has " + std::to_string(lambda_.size()) + " entries, " +
                          std::to_string(impulses) + " impulse times need one each");
  }
  lambda_.resize(impulses);
  for (std::size_t k = 0; k < lambda_.size(); ++k) {
    if (lambda_[k] == 0.0 || !std::isfinite(lambda_[k])) {
      throw InvalidSchedule("lambda_" + std::to_string(k) + " must be finite and nonzero");
    }
  }
}

ImpulseSchedule ImpulseSchedule::uniform(double theta0, double period_length,
                                         std::span<const double> pattern, int ell,
                                         int n_history, double until) {
  if (!(period_length > 0.0)) throw InvalidSchedule("period must be positive");
  if (pattern.empty()) throw InvalidSchedule("lambda pattern must not be empty");
  if (ell < 0 || n_history < 1) throw InvalidSchedule("need ell >= 0 and n_history >= 1");
  const long first = -static_cast<long>(n_history) * (ell + 1);
  std::vector<double> theta;
  std::vector<double> lambda;
  for (long k = first;; ++k) {
    const double t = theta0 + static_cast<double>(k) * period_length;
    theta.push_back(t);
    if (k >= 0) lambda.push_back(pattern[static_cast<std::size_t>(k) % pattern.size()]);
    if (k >= 0 && t > until) break;
  }
  return ImpulseSchedule(std::move(theta), std::move(lambda), ell, n_history);
}

double ImpulseSchedule::theta(long k) const {
  if (k < first_index() || k > last_index()) throw ScheduleTooShort(k);
  return theta_[static_cast<std::size_t>(k - first_index())];
}

double ImpulseSchedule::lambda(long k) const {
  if (k < 0) throw InvalidSchedule("no impulse factor for history index " + std::to_string(k));
  if (k > last_index()) throw ScheduleTooShort(k);
  return lambda_[static_cast<std::size_t>(k)];
}

std::optional<long> ImpulseSchedule::index_at_or_before(double t) const {
  const auto it = std::upper_bound(theta_.begin(), theta_.end(), t);
  if (it == theta_.begin()) return std::nullopt;
  return first_index() + static_cast<long>(it - theta_.begin()) - 1;
}

std::optional<long> ImpulseSchedule::index_of(double t) const {
  const auto it = std::lower_bound(theta_.begin(), theta_.end(), t);
  if (it == theta_.end() || *it != t) return std::nullopt;
  return first_index() + static_cast<long>(it - theta_.begin());
}

// ---------------------------------------------------------------------------

Trajectory::Trajectory(std::vector<double> grid, std::vector<double> values_left,
                       std::vector<double> values_right, std::vector<std::size_t> impulse_marks)
    : grid_(std::move(grid)),
      left_(std::move(values_left)),
      right_(std::move(values_right)),
      marks_(std::move(impulse_marks)) {
  if (left_.size() != grid_.size() || right_.size() != grid_.size()) {
    throw Error("trajectory: grid and value arrays differ in length");
  }
  for (std::size_t j = 1; j < grid_.size(); ++j) {
    if (!(grid_[j] > grid_[j - 1])) throw Error("trajectory: grid must be strictly increasing");
  }
  std::sort(marks_.begin(), marks_.end());
  marks_.erase(std::unique(marks_.begin(), marks_.end()), marks_.end());
  if (!marks_.empty() && marks_.back() >= grid_.size()) {
    throw Error("trajectory: impulse mark out of range");
  }
  for (std::size_t j = 0; j < grid_.size(); ++j) {
    if (!is_impulse(j) && left_[j] != right_[j]) {
      throw Error("trajectory: left and right values differ at a non-impulse point");
    }
  }
}

Trajectory Trajectory::continuous(std::vector<double> grid, std::vector<double> values) {
  auto copy = values;
  return Trajectory(std::move(grid), std::move(copy), std::move(values), {});
}

bool Trajectory::is_impulse(std::size_t index) const {
  return std::binary_search(marks_.begin(), marks_.end(), index);
}

double Trajectory::evaluate(double t, Side side) const {
  if (grid_.empty() || t < grid_.front() || t > grid_.back() || std::isnan(t)) {
    throw RangeError(grid_.empty() ? std::string("evaluate on an empty trajectory")
                                   : with_time("evaluate outside [" +
                                                   std::to_string(grid_.front()) + ", " +
                                                   std::to_string(grid_.back()) + "]",
                                               t));
  }
  const auto it = std::lower_bound(grid_.begin(), grid_.end(), t);
  const auto j = static_cast<std::size_t>(it - grid_.begin());
  if (*it == t) return side == Side::left ? left_[j] : right_[j];
  // grid_[j-1] < t < grid_[j]
  const double a = grid_[j - 1];
  const double b = grid_[j];
  const double w = (t - a) / (b - a);
  return right_[j - 1] + w * (left_[j] - right_[j - 1]);
}

double evaluate(const Trajectory& traj, double t, Side side) { return traj.evaluate(t, side); }

double compute_rho(const ScalarFn& tau, double t0, double horizon, std::size_t samples) {
  if (samples < 2) throw Error("compute_rho needs at least 2 samples");
  if (!(horizon > t0)) throw Error("compute_rho needs horizon > t0");
  double best = 0.0;
  for (std::size_t j = 0; j < samples; ++j) {
    const double t = j + 1 == samples
                         ? horizon
                         : t0 + (horizon - t0) * static_cast<double>(j) /
                                    static_cast<double>(samples - 1);
    double v = 0.0;
    try {
      v = tau(t);
    } catch (const EvaluationError&) {
      throw;
    } catch (const std::exception& e) {
      throw EvaluationError(std::string("delay not evaluable: ") + e.what(), t);
    }
    if (!std::isfinite(v)) throw EvaluationError("delay is not finite", t);
    best = j == 0 ? v : std::min(best, v);
  }
  return best;
}

std::vector<double> linspace(double a, double b, std::size_t count) {
  std::vector<double> out;
  if (count == 0) return out;
  if (count == 1) return {a};
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    out.push_back(j + 1 == count ? b
                                 : a + (b - a) * static_cast<double>(j) /
                                           static_cast<double>(count - 1));
  }
  return out;
}

}  // namespace ride
