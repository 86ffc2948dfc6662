#include "ride/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

#include "ride/parallel.hpp"

namespace ride::analysis {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::oscillatory:
      return "oscillatory";
    case Verdict::nonoscillatory:
      return "nonoscillatory-on-horizon";
    case Verdict::indeterminate:
      return "indeterminate";
  }
  return "indeterminate";
}

std::string to_string(Family f) {
  switch (f) {
    case Family::constant:
      return "constant";
    case Family::ramp:
      return "ramp";
    case Family::cosine:
      return "cosine";
  }
  return "constant";
}

namespace {

struct Sample {
  double t;
  double left;
  double right;
  bool after_gap;
};

/// Grid samples with t >= from and t < to (t <= to when `closed`).
void collect(const Trajectory& traj, double from, double to, bool closed,
             std::vector<Sample>& out) {
  const auto grid = traj.grid();
  const auto left = traj.values_left();
  const auto right = traj.values_right();
  const auto first = static_cast<std::size_t>(
      std::lower_bound(grid.begin(), grid.end(), from) - grid.begin());
  for (std::size_t j = first; j < grid.size(); ++j) {
    if (grid[j] > to || (!closed && grid[j] == to)) break;
    out.push_back({grid[j], left[j], right[j], false});
  }
}

}  // namespace

OscillationResult detect_oscillation(const Trajectory& traj, std::span<const Interval> restrict,
                                     double t_min, std::size_t min_changes, double floor) {
  OscillationResult result;
  if (traj.empty()) {
    result.note = "empty trajectory";
    return result;
  }
  std::vector<Sample> samples;
  if (restrict.empty()) {
    collect(traj, t_min, traj.back_time(), true, samples);
    if (!samples.empty()) samples.front().left = samples.front().right;
  } else {
    for (const auto& w : restrict) {
      const double begin = std::max(w.begin, t_min);
      const double end = std::min(w.end, traj.back_time());
      if (!(begin < end)) continue;
      const std::size_t first = samples.size();
      collect(traj, begin, end, false, samples);
      const double tail = traj.evaluate(end, Side::left);
      samples.push_back({end, tail, tail, false});
      if (first == samples.size()) continue;
      auto& head = samples[first];
      head.after_gap = true;
      head.left = first > 0 ? samples[first - 1].right : head.right;
    }
  }
  if (samples.empty()) {
    result.note = "empty window after t_min";
    return result;
  }

  double min_abs = std::numeric_limits<double>::infinity();
  auto add = [&](double xi) {
    if (result.sign_changes.empty() || xi > result.sign_changes.back()) {
      result.sign_changes.push_back(xi);
    }
  };
  for (std::size_t m = 0; m < samples.size(); ++m) {
    const auto& s = samples[m];
    min_abs = std::min({min_abs, std::abs(s.left), std::abs(s.right)});
    if (m > 0 && !s.after_gap) {
      const auto& prev = samples[m - 1];
      if (prev.right * s.left < 0.0) {
        add(prev.t + (s.t - prev.t) * prev.right / (prev.right - s.left));
      }
    }
    if (s.left * s.right <= 0.0) add(s.t);
  }

  if (result.count() >= min_changes) {
    result.verdict = Verdict::oscillatory;
  } else if (result.count() == 0 && min_abs > floor) {
    result.verdict = Verdict::nonoscillatory;
    result.eventual_sign = samples.back().right > 0.0 ? 1 : -1;
  } else {
    std::ostringstream note;
    if (result.count() == 0) {
      note << "no sign change but |x| reaches " << min_abs << " <= floor " << floor;
    } else {
      note << result.count() << " sign change(s), fewer than " << min_changes;
    }
    result.note = note.str();
  }
  return result;
}

std::vector<Interval> residue_windows(const warp::WarpGrid& grid, int i, double from, double to) {
  std::vector<Interval> windows;
  for (long v = 0;; ++v) {
    double begin = 0.0;
    double end = 0.0;
    try {
      begin = grid.block_start(i, v);
      end = grid.block_end(i, v);
    } catch (const Error&) {
      break;
    }
    if (begin > to) break;
    if (end <= from) continue;
    windows.push_back({std::max(begin, from), std::min(end, to)});
  }
  return windows;
}

bool criterion_one_over_e(double q, double delay) { return q * delay > 1.0 / std::numbers::e; }

bool criterion_pi_over_two(double q, double delay) {
  return q > 0.0 && q * delay <= std::numbers::pi / 2.0;
}

std::vector<CriterionResult> evaluate_criteria(const warp::WarpGrid& grid, const DelaySpec& spec,
                                               const warp::CompanionSystem& companions) {
  std::vector<CriterionResult> out;
  const double theta0 = grid.schedule().theta0();
  const auto& pa = spec.p.affine();
  const auto& ta = spec.tau.affine();
  const bool structural = pa && pa->is_constant() && ta && ta->is_shift();
  for (const auto& c : companions.companions) {
    CriterionResult r;
    r.residue = c.residue;
    if (!structural) {
      r.note = "p is not a constant or tau is not a shift";
      out.push_back(r);
      continue;
    }
    const double mid = theta0 + 0.5 * (c.horizon - theta0);
    const auto ts = linspace(mid, c.horizon, 65);
    bool settled = true;
    double q0 = 0.0;
    double d0 = 0.0;
    for (std::size_t m = 0; m < ts.size() && settled; ++m) {
      const double q = c.problem.q(ts[m], Side::right);
      const double d = ts[m] - c.problem.sigma(ts[m], Side::right);
      if (m == 0) {
        q0 = q;
        d0 = d;
        continue;
      }
      const double tol = 1e-12 * std::max({1.0, std::abs(q0), std::abs(d0), std::abs(ts[m])});
      settled = std::abs(q - q0) <= tol && std::abs(d - d0) <= tol;
    }
    if (!settled) {
      r.note = "companion coefficient or delay is not constant on the second half of the horizon";
    } else if (!(d0 > 0.0)) {
      r.q = q0;
      r.note = "companion has no delay";
    } else {
      r.applicable = true;
      r.q = q0;
      r.delay = d0;
      r.one_over_e = criterion_one_over_e(q0, d0);
      r.pi_over_two = criterion_pi_over_two(q0, d0);
    }
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------

ScalarFn family_member(Family f, double rho, double start) {
  const double span = start - rho;
  switch (f) {
    case Family::constant:
      return [](double) { return 1.0; };
    case Family::ramp:
      return [rho, span](double t) {
        if (!(span > 0.0)) return 1.0;
        return std::clamp((t - rho) / span, 0.0, 1.0);
      };
    case Family::cosine:
      return [rho, span](double t) {
        if (!(span > 0.0)) return 1.0;
        return std::cos(2.0 * std::numbers::pi * (t - rho) / span);
      };
  }
  return [](double) { return 1.0; };
}

ProbeTarget impulsive_target(const DelaySpec& spec, const ImpulseSchedule& sched,
                             const solver::SolveConfig& cfg) {
  ProbeTarget target;
  target.horizon = cfg.horizon;
  const auto tau = spec.tau.fn();
  const double horizon = cfg.horizon;
  target.local_start = [](double start) { return start; };
  target.rho = [tau, horizon](double start) {
    return std::min(start, compute_rho(tau, start, horizon, 1001));
  };
  target.solve = [spec, sched, cfg, tau, horizon](double start, const ScalarFn& phi) {
    InitialData init{phi, start, std::min(start, compute_rho(tau, start, horizon, 1001))};
    return solver::solve_impulsive(spec, sched, init, cfg);
  };
  return target;
}

double warped_position(const warp::WarpGrid& grid, int i, double t) {
  if (grid.chi(i, t)) return grid.beta(i, t);
  return grid.warped_horizon(i, t);
}

ProbeTarget companion_target(const warp::WarpGrid& grid, const warp::Companion& companion,
                             const solver::SolveConfig& cfg) {
  ProbeTarget target;
  target.horizon = companion.horizon;
  const auto g = std::make_shared<const warp::WarpGrid>(grid);
  const int i = companion.residue;
  const auto problem = companion.problem;
  const double horizon = companion.horizon;
  auto local = [g, i](double start) { return warped_position(*g, i, start); };
  auto rho = [local, problem, horizon](double start) {
    const double s = local(start);
    double low = s;
    for (double t : linspace(s, horizon, 1001)) low = std::min(low, problem.sigma(t, Side::right));
    return low;
  };
  target.local_start = local;
  target.rho = rho;
  target.solve = [local, rho, problem, cfg, horizon](double start, const ScalarFn& phi) {
    solver::PlainProblem p = problem;
    p.t0 = local(start);
    p.history_start = rho(start);
    p.phi = [phi](double t, Side) { return phi(t); };
    std::erase_if(p.breakpoints, [&](double t) { return t <= p.t0; });
    p.history_breaks.clear();
    solver::SolveConfig c = cfg;
    c.horizon = horizon;
    return solver::solve_plain(p, c);
  };
  return target;
}

namespace {

struct ProbeRun {
  double sup = 0.0;
  double tail = 0.0;
  double growth = 1.0;
};

ProbeRun measure(const Trajectory& x, double start, double horizon) {
  ProbeRun run;
  const double mid = 0.5 * (start + horizon);
  double first = 0.0;
  double second = 0.0;
  const auto grid = x.grid();
  const auto left = x.values_left();
  const auto right = x.values_right();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double t = grid[j];
    if (t < start) continue;
    double v = std::abs(right[j]);
    if (t > start) v = std::max(v, std::abs(left[j]));
    run.sup = std::max(run.sup, v);
    if (t <= mid) first = std::max(first, v);
    if (t >= mid) second = std::max(second, v);
  }
  run.tail = std::abs(right.back());
  if (first > 0.0) {
    run.growth = second / first;
  } else {
    run.growth = second == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  }
  return run;
}

}  // namespace

StabilityTable probe_stability(const ProbeTarget& target, std::span<const double> start_times,
                               std::span<const double> eps_list, double tail_tol,
                               std::size_t threads) {
  constexpr Family kFamilies[] = {Family::constant, Family::ramp, Family::cosine};
  constexpr std::size_t kMembers = std::size(kFamilies);
  StabilityTable table;
  table.tail_tol = tail_tol;
  const std::size_t jobs = start_times.size() * kMembers;
  std::vector<ProbeRun> runs(jobs);
  parallel_for(jobs, threads, [&](std::size_t job) {
    const double start = start_times[job / kMembers];
    const double local = target.local_start(start);
    const double rho = target.rho(start);
    const auto phi = family_member(kFamilies[job % kMembers], rho, local);
    runs[job] = measure(target.solve(start, phi), local, target.horizon);
  });

  bool stable = !start_times.empty();
  bool decays = true;
  double min_amp = std::numeric_limits<double>::infinity();
  double max_amp = 0.0;
  for (std::size_t s = 0; s < start_times.size(); ++s) {
    double amp = 0.0;
    double tail = 0.0;
    double growth = 0.0;
    for (std::size_t m = 0; m < kMembers; ++m) {
      const auto& run = runs[s * kMembers + m];
      amp = std::max(amp, run.sup);
      tail = std::max(tail, run.tail);
      growth = std::max(growth, run.growth);
    }
    stable = stable && std::isfinite(amp) && growth <= 1.0 + 1e-6;
    decays = decays && tail <= tail_tol;
    min_amp = std::min(min_amp, amp);
    max_amp = std::max(max_amp, amp);
    for (double eps : eps_list) {
      StabilityRow row;
      row.eps = eps;
      row.start = start_times[s];
      row.amplification = amp;
      row.growth_ratio = growth;
      row.delta = amp > 0.0 ? eps / amp : std::numeric_limits<double>::infinity();
      row.sup_abs = amp > 0.0 ? row.delta * amp : 0.0;
      row.tail_abs = amp > 0.0 ? row.delta * tail : 0.0;
      table.rows.push_back(row);
    }
  }
  table.stable = stable;
  table.uniform = stable && min_amp > 0.0 && max_amp / min_amp < 10.0;
  table.asymptotic = stable && decays;
  return table;
}

// ---------------------------------------------------------------------------

double default_t_min(const Setup& setup, double horizon) {
  const double theta0 = setup.sched.theta0();
  double delay = 0.0;
  for (double t : linspace(theta0, horizon, 201)) delay = std::max(delay, t - setup.spec.tau(t));
  return theta0 + 5.0 * delay;
}

Solutions solve_all(const Setup& setup, const Options& options) {
  warp::WarpGrid grid(setup.sched);
  const double horizon = options.solve.horizon;
  const auto report =
      warp::check_assumptions(grid, setup.spec, horizon, options.assumption_samples);
  if (!report.a2_ok) {
    throw AssumptionViolation("A2", "tau(t) > t", report.a2_witness.value_or(0.0));
  }
  if (!report.a4_ok) throw AssumptionViolation("A4", "an impulse factor is zero", 0.0);
  if (!report.a5_ok) {
    throw AssumptionViolation("A5", report.a5_detail, report.a5_witness.value_or(0.0));
  }

  Trajectory x = solver::solve_impulsive(setup.spec, setup.sched, setup.init, options.solve);
  auto companions = warp::build_companions(grid, setup.spec, setup.init, horizon);
  std::vector<Trajectory> paths(companions.companions.size());
  parallel_for(paths.size(), options.threads, [&](std::size_t j) {
    const auto& c = companions.companions[j];
    solver::SolveConfig cfg = options.solve;
    cfg.horizon = c.horizon;
    paths[j] = solver::solve_plain(c.problem, cfg);
  });
  return Solutions{std::move(grid), std::move(companions), std::move(x), std::move(paths)};
}

namespace {

double sup_abs(const Trajectory& x, double from) {
  double s = 0.0;
  const auto grid = x.grid();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (grid[j] < from) continue;
    s = std::max({s, std::abs(x.values_left()[j]), std::abs(x.values_right()[j])});
  }
  return s;
}

}  // namespace

EquivalenceReport verify_equivalence(const Setup& setup, const Solutions& solutions,
                                     const Options& options) {
  EquivalenceReport report;
  const auto& grid = solutions.grid;
  const auto& x = solutions.impulsive;
  const auto& sched = setup.sched;
  const double theta0 = sched.theta0();
  const double horizon = x.back_time();
  const double t_min = options.t_min.value_or(default_t_min(setup, horizon));

  for (int i = 0; i < grid.residues(); ++i) {
    const auto& y = solutions.companion_paths[static_cast<std::size_t>(i)];
    ResidueEquivalence r;
    r.residue = i;
    const Trajectory proj = warp::project(grid, x, i);
    const auto pg = proj.grid();
    for (std::size_t j = 0; j < pg.size(); ++j) {
      const double s = pg[j];
      if (s < y.front_time() || s > y.back_time()) continue;
      double dev = std::abs(proj.values_right()[j] - y.evaluate(s, Side::right));
      if (proj.is_impulse(j)) {
        dev = std::max(dev, std::abs(proj.values_left()[j] - y.evaluate(s, Side::left)));
      }
      r.projection_deviation = std::max(r.projection_deviation, dev);
    }
    r.projection_scale = sup_abs(y, y.front_time());
    r.junction_mismatch = warp::junction_mismatch(grid, x, i);
    const auto windows = residue_windows(grid, i, theta0, horizon);
    r.impulsive = detect_oscillation(x, windows, t_min, options.min_changes, options.floor);
    const double local_min = t_min <= theta0 ? theta0 : warped_position(grid, i, t_min);
    r.companion = detect_oscillation(y, {}, local_min, options.min_changes, options.floor);
    r.verdicts_agree = r.impulsive.verdict == r.companion.verdict;
    report.residues.push_back(std::move(r));
  }

  std::vector<double> times;
  for (double t : x.grid()) {
    if (t >= theta0) times.push_back(t);
  }
  const Trajectory recon = warp::reconstruct(grid, solutions.companion_paths, times);
  const auto rg = recon.grid();
  for (std::size_t j = 0; j < rg.size(); ++j) {
    const double t = rg[j];
    double dev = std::abs(recon.values_right()[j] - x.evaluate(t, Side::right));
    if (recon.is_impulse(j)) {
      dev = std::max(dev, std::abs(recon.values_left()[j] - x.evaluate(t, Side::left)));
    }
    report.reconstruction_deviation = std::max(report.reconstruction_deviation, dev);
  }
  report.reconstruction_scale = sup_abs(x, theta0);

  bool negative_late = false;
  for (long k = 0; k <= sched.last_index(); ++k) {
    const double t = sched.theta(k);
    if (t > horizon) break;
    if (sched.lambda(k) < 0.0) {
      report.positive_factors = false;
      if (t >= t_min) negative_late = true;
    }
  }

  report.direct = detect_oscillation(x, {}, t_min, options.min_changes, options.floor).verdict;

  bool any_osc = false;
  bool all_non = true;
  int sign = 0;
  bool mixed = false;
  for (const auto& r : report.residues) {
    if (r.companion.verdict == Verdict::oscillatory) any_osc = true;
    if (r.companion.verdict != Verdict::nonoscillatory) {
      all_non = false;
      continue;
    }
    // Positive factors keep the companion sign on its blocks; otherwise the
    // product sign at the last block decides.
    int s = r.companion.eventual_sign;
    if (!report.positive_factors) {
      const double product = grid.real_product(r.residue, -std::numeric_limits<double>::infinity(),
                                               horizon, false);
      if (product < 0.0) s = -s;
    }
    if (sign == 0) sign = s;
    else if (s != sign) mixed = true;
  }
  if (negative_late) {
    report.inferred = Verdict::oscillatory;
    report.inference_rule = "negative impulse factor: sign flips at impulse times";
  } else if (any_osc) {
    report.inferred = Verdict::oscillatory;
    report.inference_rule = "an oscillatory companion";
  } else if (all_non && mixed) {
    report.inferred = Verdict::oscillatory;
    report.inference_rule = "nonoscillatory companions with different eventual signs";
  } else if (all_non) {
    report.inferred = Verdict::nonoscillatory;
    report.inference_rule = "all companions nonoscillatory with a common sign";
  } else {
    report.inferred = Verdict::indeterminate;
    report.inference_rule = "companion verdicts indeterminate";
  }
  report.overall_agree = report.inferred == report.direct;
  return report;
}

AnalysisReport analyze(const Setup& setup, const Options& options) {
  AnalysisReport report;
  const double horizon = options.solve.horizon;
  Solutions solutions = solve_all(setup, options);
  report.assumptions = warp::check_assumptions(solutions.grid, setup.spec, horizon,
                                               options.assumption_samples);
  report.t_min = options.t_min.value_or(default_t_min(setup, horizon));
  report.oscillation = detect_oscillation(solutions.impulsive, {}, report.t_min,
                                          options.min_changes, options.floor);
  report.criteria = evaluate_criteria(solutions.grid, setup.spec, solutions.companions);

  std::vector<double> starts = options.start_times;
  if (starts.empty()) starts.push_back(setup.sched.theta0());
  report.stability =
      probe_stability(impulsive_target(setup.spec, setup.sched, options.solve), starts,
                      options.eps_list, options.tail_tol, options.threads);
  for (const auto& c : solutions.companions.companions) {
    report.companion_stability.push_back(
        probe_stability(companion_target(solutions.grid, c, options.solve), starts,
                        options.eps_list, options.tail_tol, options.threads));
  }

  Options eq_options = options;
  eq_options.t_min = report.t_min;
  report.equivalence = verify_equivalence(setup, solutions, eq_options);
  bool all_stable = true;
  bool all_uniform = true;
  bool all_asymptotic = true;
  for (const auto& t : report.companion_stability) {
    all_stable = all_stable && t.stable;
    all_uniform = all_uniform && t.uniform;
    all_asymptotic = all_asymptotic && t.asymptotic;
  }
  report.equivalence.stable_agree = all_stable == report.stability.stable;
  report.equivalence.uniform_agree = all_uniform == report.stability.uniform;
  report.equivalence.asymptotic_agree = all_asymptotic == report.stability.asymptotic;
  return report;
}

}  // namespace ride::analysis
