#include "ride/solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace ride::solver {

void SolveConfig::validate(double t0) const {
  if (!(step > 0.0) || !std::isfinite(step)) throw Error("step must be positive");
  if (!(horizon > t0)) throw Error("horizon must exceed the initial time");
  if (picard_iters < 1) throw Error("picard_iters must be >= 1");
  if (!(tol_impulse >= 0.0)) throw Error("tol_impulse must be >= 0");
}

namespace {

struct ImpulseRule {
  double factor;
  double reference;
};

/// Uniform points spaced `h` from t0 in both directions, merged with the
/// mandatory points. Uniform points closer than h/10 to a mandatory point are
/// dropped so no step is degenerately short.
std::vector<double> build_grid(double history_start, double t0, double horizon, double h,
                               std::vector<double> mandatory) {
  mandatory.push_back(history_start);
  mandatory.push_back(t0);
  mandatory.push_back(horizon);
  std::erase_if(mandatory, [&](double t) { return t < history_start || t > horizon; });
  std::sort(mandatory.begin(), mandatory.end());
  mandatory.erase(std::unique(mandatory.begin(), mandatory.end()), mandatory.end());

  std::vector<double> uniform;
  for (long m = 1;; ++m) {
    const double t = t0 - static_cast<double>(m) * h;
    if (t <= history_start) break;
    uniform.push_back(t);
  }
  std::reverse(uniform.begin(), uniform.end());
  for (long m = 1;; ++m) {
    const double t = t0 + static_cast<double>(m) * h;
    if (t >= horizon) break;
    uniform.push_back(t);
  }

  const double guard = 0.1 * h;
  std::vector<double> grid;
  grid.reserve(uniform.size() + mandatory.size());
  std::size_t m = 0;
  for (double u : uniform) {
    while (m < mandatory.size() && mandatory[m] <= u) grid.push_back(mandatory[m++]);
    const double prev = grid.empty() ? -INFINITY : grid.back();
    const double next = m < mandatory.size() ? mandatory[m] : INFINITY;
    if (u - prev > guard && next - u > guard) grid.push_back(u);
  }
  while (m < mandatory.size()) grid.push_back(mandatory[m++]);
  return grid;
}

/// x'(t) = -coef(t) x(arg(t)) with optional impulses at grid points.
class Engine {
 public:
  Engine(SidedFn coef, SidedFn arg, SidedFn phi, double t0, double history_start,
         const SolveConfig& cfg)
      : coef_(std::move(coef)),
        arg_(std::move(arg)),
        phi_(std::move(phi)),
        t0_(t0),
        history_start_(history_start),
        cfg_(cfg) {}

  Trajectory run(std::vector<double> mandatory, std::vector<double> two_sided_history,
                 const std::map<double, ImpulseRule>& impulses) {
    grid_ = build_grid(history_start_, t0_, cfg_.horizon, cfg_.step, std::move(mandatory));
    left_.assign(grid_.size(), 0.0);
    right_.assign(grid_.size(), 0.0);
    std::vector<std::size_t> marks;

    std::sort(two_sided_history.begin(), two_sided_history.end());
    const auto start = static_cast<std::size_t>(
        std::lower_bound(grid_.begin(), grid_.end(), t0_) - grid_.begin());

    for (std::size_t j = 0; j < start; ++j) {
      const double t = grid_[j];
      right_[j] = phi_(t, Side::right);
      left_[j] = j > 0 && std::binary_search(two_sided_history.begin(), two_sided_history.end(), t)
                     ? phi_(t, Side::left)
                     : right_[j];
      if (left_[j] != right_[j]) marks.push_back(j);
      check_finite(right_[j], t);
      check_finite(left_[j], t);
    }

    left_[start] = phi_(t0_, Side::left);
    right_[start] = left_[start];
    apply_impulse(start, impulses, marks);
    check_finite(right_[start], t0_);
    committed_ = start;

    for (std::size_t j = start; j + 1 < grid_.size(); ++j) {
      step(j);
      apply_impulse(j + 1, impulses, marks);
      committed_ = j + 1;
    }
    return Trajectory(std::move(grid_), std::move(left_), std::move(right_), std::move(marks));
  }

 private:
  void apply_impulse(std::size_t j, const std::map<double, ImpulseRule>& impulses,
                     std::vector<std::size_t>& marks) {
    const auto it = impulses.find(grid_[j]);
    if (it == impulses.end()) {
      right_[j] = left_[j];
      return;
    }
    right_[j] = it->second.factor * reference_left(it->second.reference, j);
    marks.push_back(j);
  }

  double reference_left(double ref, std::size_t j) const {
    if (ref < t0_) return phi_(ref, Side::left);
    const auto it = std::lower_bound(grid_.begin(), grid_.begin() + static_cast<long>(j) + 1, ref);
    if (it == grid_.begin() + static_cast<long>(j) + 1 || *it != ref) {
      throw SolverError("impulse reference time is not on the grid");
    }
    return left_[static_cast<std::size_t>(it - grid_.begin())];
  }

  void check_finite(double v, double t) const {
    if (!std::isfinite(v)) throw EvaluationError("solution is not finite", t);
  }

  double argument(double t, Side side) const {
    double s = arg_(t, side);
    if (!std::isfinite(s)) throw EvaluationError("deviating argument is not finite", t);
    if (s > t) {
      if (s - t > 1e-12 * std::max(1.0, std::abs(t))) {
        throw AssumptionViolation("A2", "deviating argument exceeds t", t);
      }
      s = t;
    }
    return s;
  }

  /// x(s) from committed samples [0, committed_] or, when `pending`, the
  /// linear segment from grid_[committed_] to the current iterate.
  double lookup(double s, Side side, const double* pending, bool& used_pending) const {
    const std::size_t j = committed_;
    if (s < grid_.front()) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "history does not reach " << s << " (starts at " << grid_.front() << ")";
      throw SolverError(msg.str());
    }
    if (s > grid_[j]) {
      if (pending == nullptr) throw AssumptionViolation("A2", "lookup ahead of the solution", s);
      used_pending = true;
      const double a = grid_[j];
      const double b = grid_[j + 1];
      if (s >= b) return *pending;
      return right_[j] + (s - a) / (b - a) * (*pending - right_[j]);
    }
    const auto end = grid_.begin() + static_cast<long>(j) + 1;
    const auto it = std::lower_bound(grid_.begin(), end, s);
    const auto k = static_cast<std::size_t>(it - grid_.begin());
    if (grid_[k] == s) return side == Side::left ? left_[k] : right_[k];
    const double a = grid_[k - 1];
    const double b = grid_[k];
    return right_[k - 1] + (s - a) / (b - a) * (left_[k] - right_[k - 1]);
  }

  void step(std::size_t j) {
    const double ta = grid_[j];
    const double tb = grid_[j + 1];
    const double dt = tb - ta;
    const double xa = right_[j];
    bool unused = false;

    const double f0 = -coef_(ta, Side::right) * lookup(argument(ta, Side::right), Side::right,
                                                       nullptr, unused);
    double iterate = xa + dt * f0;
    const double cb = coef_(tb, Side::left);
    const double sb = argument(tb, Side::left);
    for (int sweep = 0; sweep < cfg_.picard_iters; ++sweep) {
      bool used_pending = false;
      const double f1 = -cb * lookup(sb, Side::left, &iterate, used_pending);
      iterate = xa + 0.5 * dt * (f0 + f1);
      if (!used_pending) break;
    }
    check_finite(iterate, tb);
    left_[j + 1] = iterate;
  }

  SidedFn coef_;
  SidedFn arg_;
  SidedFn phi_;
  double t0_;
  double history_start_;
  SolveConfig cfg_;
  std::vector<double> grid_;
  std::vector<double> left_;
  std::vector<double> right_;
  std::size_t committed_ = 0;
};

}  // namespace

Trajectory solve_impulsive(const DelaySpec& spec, const ImpulseSchedule& sched,
                           const InitialData& init, const SolveConfig& cfg) {
  cfg.validate(init.t0);
  if (!spec.p || !spec.tau || !init.phi) throw Error("equation and initial data must be set");
  if (init.t0 < sched.theta0()) throw Error("initial time precedes theta_0");
  if (!sched.covers(cfg.horizon)) {
    throw ScheduleTooShort(*sched.index_at_or_before(cfg.horizon) + 1);
  }

  const long first_impulse = [&] {
    const auto k = sched.index_of(init.t0);
    if (k) return *k;
    return *sched.index_at_or_before(init.t0) + 1;
  }();
  double history_start = std::min(init.rho, init.t0);
  std::map<double, ImpulseRule> impulses;
  std::vector<double> mandatory;
  for (long k = std::max(first_impulse, 0L); k <= sched.last_index(); ++k) {
    const double t = sched.theta(k);
    if (t > cfg.horizon) break;
    const double ref = sched.theta(k - sched.ell());
    impulses.emplace(t, ImpulseRule{sched.lambda(k), ref});
    mandatory.push_back(t);
    history_start = std::min(history_start, ref);
  }
  for (long k = sched.first_index(); k <= sched.last_index(); ++k) {
    const double t = sched.theta(k);
    if (t >= init.t0) break;
    if (t >= history_start) mandatory.push_back(t);
  }

  const auto& p = spec.p;
  const auto& tau = spec.tau;
  const auto& phi = init.phi;
  Engine engine([p](double t, Side) { return p(t); }, [tau](double t, Side) { return tau(t); },
                [phi](double t, Side) { return phi(t); }, init.t0, history_start, cfg);
  return engine.run(std::move(mandatory), {}, impulses);
}

Trajectory solve_plain(const PlainProblem& problem, const SolveConfig& cfg) {
  cfg.validate(problem.t0);
  if (!problem.q || !problem.sigma || !problem.phi) throw Error("companion problem incomplete");
  if (problem.history_start > problem.t0) throw Error("history must start before t0");
  std::vector<double> mandatory = problem.breakpoints;
  for (double t : problem.history_breaks) {
    if (t > problem.history_start && t < problem.t0) mandatory.push_back(t);
  }
  Engine engine(problem.q, problem.sigma, problem.phi, problem.t0, problem.history_start, cfg);
  return engine.run(std::move(mandatory), problem.history_breaks, {});
}

Trajectory solve_plain(const ScalarFn& q, const ScalarFn& sigma, const ScalarFn& phi,
                       double history_start, double t0, const SolveConfig& cfg) {
  PlainProblem problem;
  problem.q = [q](double t, Side) { return q(t); };
  problem.sigma = [sigma](double t, Side) { return sigma(t); };
  problem.phi = [phi](double t, Side) { return phi(t); };
  problem.t0 = t0;
  problem.history_start = history_start;
  return solve_plain(problem, cfg);
}

double impulse_residual(const Trajectory& traj, const ImpulseSchedule& sched,
                        const ScalarFn& phi) {
  double worst = 0.0;
  const auto grid = traj.grid();
  for (std::size_t j : traj.impulse_marks()) {
    const auto k = sched.index_of(grid[j]);
    if (!k || *k < 0) continue;
    const double ref = sched.theta(*k - sched.ell());
    const double ref_value = ref < traj.front_time() ? phi(ref) : traj.evaluate(ref, Side::left);
    worst = std::max(worst, std::abs(traj.values_right()[j] - sched.lambda(*k) * ref_value));
  }
  return worst;
}

}  // namespace ride::solver
