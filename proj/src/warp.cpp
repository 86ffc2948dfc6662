#include "ride/warp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace ride::warp {

namespace {

long floor_mod(long k, long m) { return ((k % m) + m) % m; }
long floor_div(long k, long m) { return (k - floor_mod(k, m)) / m; }

std::string fmt(double t) {
  std::ostringstream out;
  out.precision(17);
  out << t;
  return out.str();
}

/// Position of the block containing t: theta_k <= t < theta_{k+1} (right) or
/// theta_k < t <= theta_{k+1} (left).
std::optional<long> enclosing_index(const ImpulseSchedule& sched, double t, Side side) {
  const auto times = sched.times();
  const auto it = side == Side::right ? std::upper_bound(times.begin(), times.end(), t)
                                      : std::lower_bound(times.begin(), times.end(), t);
  if (it == times.begin()) {
    // The first history point has no block to its left.
    if (side == Side::left && !times.empty() && t == times.front()) return sched.first_index();
    return std::nullopt;
  }
  return sched.first_index() + static_cast<long>(it - times.begin()) - 1;
}

constexpr std::size_t kDirectProductLimit = 64;

}  // namespace

WarpGrid::WarpGrid(ImpulseSchedule schedule) : sched_(std::move(schedule)) {
  const long period = sched_.period();
  const long n = sched_.n_history();
  const long kmax = sched_.last_index();
  junctions_.resize(static_cast<std::size_t>(period));
  starts_.resize(static_cast<std::size_t>(period));
  log_prefix_.resize(static_cast<std::size_t>(period));
  neg_prefix_.resize(static_cast<std::size_t>(period));

  for (long i = 0; i < period; ++i) {
    auto& junction = junctions_[static_cast<std::size_t>(i)];
    // Backward: [vartheta_k, vartheta_{k+1}) has the length of block k.
    std::vector<double> back{sched_.theta0()};
    for (long k = -1; k >= -n; --k) {
      const double len = sched_.theta(k * period + i + 1) - sched_.theta(k * period + i);
      back.push_back(back.back() - len);
    }
    junction.assign(back.rbegin(), back.rend());
    for (long k = 1; (k - 1) * period + i + 1 <= kmax; ++k) {
      const double len =
          sched_.theta((k - 1) * period + i + 1) - sched_.theta((k - 1) * period + i);
      junction.push_back(junction.back() + len);
    }

    auto& starts = starts_[static_cast<std::size_t>(i)];
    auto& logs = log_prefix_[static_cast<std::size_t>(i)];
    auto& negs = neg_prefix_[static_cast<std::size_t>(i)];
    logs.push_back(0.0);
    negs.push_back(0);
    for (long j = 0; j * period + i <= kmax; ++j) {
      starts.push_back(sched_.theta(j * period + i));
      const double lambda = sched_.lambda(j * period + i);
      logs.push_back(logs.back() + std::log(std::abs(lambda)));
      negs.push_back(negs.back() + (lambda < 0.0 ? 1 : 0));
    }
  }
}

long WarpGrid::last_junction(int i) const {
  return first_junction() + static_cast<long>(junctions(i).size()) - 1;
}

std::span<const double> WarpGrid::junctions(int i) const {
  if (i < 0 || i >= residues()) throw RangeError("residue out of range: " + std::to_string(i));
  return junctions_[static_cast<std::size_t>(i)];
}

double WarpGrid::vartheta(int i, long k) const {
  const auto j = junctions(i);
  if (k < first_junction() || k > last_junction(i)) {
    throw ScheduleTooShort((k - 1) * sched_.period() + i + 1);
  }
  return j[static_cast<std::size_t>(k - first_junction())];
}

double WarpGrid::block_start(int i, long v) const { return sched_.theta(v * sched_.period() + i); }

double WarpGrid::block_end(int i, long v) const {
  return sched_.theta(v * sched_.period() + i + 1);
}

double WarpGrid::alpha(int i, double t, Side side) const {
  const auto j = junctions(i);
  if (std::isnan(t) || t < j.front()) {
    throw RangeError("alpha_" + std::to_string(i) + ": t = " + fmt(t) +
                     " precedes the warped domain start " + fmt(j.front()));
  }
  if (t > j.back()) throw ScheduleTooShort(last_junction(i) * sched_.period() + i + 1);
  if (side == Side::left && t > j.front()) {
    const auto b = static_cast<long>(std::lower_bound(j.begin(), j.end(), t) - j.begin()) - 1;
    const long k = b + first_junction();
    if (t == j[static_cast<std::size_t>(b + 1)]) return block_end(i, k);
    return block_start(i, k) + (t - j[static_cast<std::size_t>(b)]);
  }
  const auto b = static_cast<long>(std::upper_bound(j.begin(), j.end(), t) - j.begin()) - 1;
  const long k = b + first_junction();
  return block_start(i, k) + (t - j[static_cast<std::size_t>(b)]);
}

double WarpGrid::beta(int i, double t, Side side) const {
  if (i < 0 || i >= residues()) throw RangeError("residue out of range: " + std::to_string(i));
  const auto k = enclosing_index(sched_, t, side);
  if (!k) {
    throw RangeError("beta_" + std::to_string(i) + ": t = " + fmt(t) +
                     " precedes the first history point " + fmt(sched_.rho()));
  }
  if (*k >= sched_.last_index()) throw ScheduleTooShort(*k + 1);
  const long period = sched_.period();
  const long r = floor_mod(*k, period);
  if (r != i) {
    throw RangeError("beta_" + std::to_string(i) + ": t = " + fmt(t) + " lies in [" +
                     fmt(sched_.theta(*k)) + ", " + fmt(sched_.theta(*k + 1)) +
                     "), a block of residue " + std::to_string(r));
  }
  const long v = floor_div(*k - i, period);
  if (side == Side::left && t == sched_.theta(*k + 1)) return vartheta(i, v + 1);
  return vartheta(i, v) + (t - sched_.theta(*k));
}

std::optional<int> WarpGrid::residue_of(double t, Side side) const {
  const auto k = enclosing_index(sched_, t, side);
  if (!k) return std::nullopt;
  return static_cast<int>(floor_mod(*k, sched_.period()));
}

bool WarpGrid::chi(int i, double t) const {
  if (t < sched_.theta0()) return false;
  const auto r = residue_of(t);
  return r && *r == i;
}

double WarpGrid::product_over(std::span<const double> times, int i, double s, double t,
                              bool inverted, Bounds bounds) const {
  if (!(s <= t)) return 1.0;
  const bool open_left = bounds == Bounds::open_closed;
  const auto lo =
      static_cast<std::size_t>((open_left ? std::upper_bound(times.begin(), times.end(), s)
                                          : std::lower_bound(times.begin(), times.end(), s)) -
                               times.begin());
  const auto hi =
      static_cast<std::size_t>((open_left ? std::upper_bound(times.begin(), times.end(), t)
                                          : std::lower_bound(times.begin(), times.end(), t)) -
                               times.begin());
  if (hi <= lo) return 1.0;
  const auto period = static_cast<long>(sched_.period());
  const auto& logs = log_prefix_[static_cast<std::size_t>(i)];
  if (hi + 1 > logs.size()) {
    throw ScheduleTooShort(static_cast<long>(hi - 1) * period + i);
  }
  if (hi - lo <= kDirectProductLimit) {
    double product = 1.0;
    for (std::size_t j = lo; j < hi; ++j) {
      const double lambda = sched_.lambda(static_cast<long>(j) * period + i);
      product *= inverted ? 1.0 / lambda : lambda;
    }
    return product;
  }
  const auto& negs = neg_prefix_[static_cast<std::size_t>(i)];
  const double log_magnitude = logs[hi] - logs[lo];
  const bool negative = ((negs[hi] - negs[lo]) % 2) != 0;
  const double magnitude = std::exp(inverted ? -log_magnitude : log_magnitude);
  return negative ? -magnitude : magnitude;
}

double WarpGrid::impulse_product(int i, double s, double t, bool inverted, Bounds bounds) const {
  const auto all = junctions(i);
  const auto positive = all.subspan(static_cast<std::size_t>(-first_junction()));
  if (t > positive.back()) throw ScheduleTooShort(last_junction(i) * sched_.period() + i + 1);
  return product_over(positive, i, s, t, inverted, bounds);
}

double WarpGrid::real_product(int i, double s, double t, bool inverted, Bounds bounds) const {
  if (i < 0 || i >= residues()) throw RangeError("residue out of range: " + std::to_string(i));
  if (t > sched_.times().back()) throw ScheduleTooShort(sched_.last_index() + 1);
  return product_over(starts_[static_cast<std::size_t>(i)], i, s, t, inverted, bounds);
}

double WarpGrid::warped_horizon(int i, double t) const {
  const auto k = enclosing_index(sched_, t, Side::right);
  if (!k || *k < 0) throw RangeError("warped_horizon: t = " + fmt(t) + " precedes theta_0");
  const long period = sched_.period();
  const long r = floor_mod(*k, period);
  if (r == i) return beta(i, t);
  const long last = *k - floor_mod(r - i, period);
  const long v = floor_div(last - i, period);
  return vartheta(i, v + 1);
}

double WarpGrid::real_extent(int i, double s) const {
  try {
    return alpha(i, s, Side::right);
  } catch (const Error&) {
    return alpha(i, s, Side::left);
  }
}

// ---------------------------------------------------------------------------

double sigma(const WarpGrid& grid, int i, const ScalarFn& tau, double t, Side side) {
  const double a = grid.alpha(i, t, side);
  const double delayed = tau(a);
  try {
    return grid.beta(i, delayed, side);
  } catch (const ScheduleTooShort&) {
    throw;
  } catch (const RangeError& e) {
    throw AssumptionViolation("A5",
                              std::string("delayed argument leaves the residue-") +
                                  std::to_string(i) + " blocks: " + e.what(),
                              t);
  }
}

Trajectory project(const WarpGrid& grid, const Trajectory& x, int i) {
  const auto& sched = grid.schedule();
  const auto times = x.grid();
  const auto right = x.values_right();
  constexpr double kAll = -std::numeric_limits<double>::infinity();

  std::vector<double> out_grid;
  std::vector<double> out_left;
  std::vector<double> out_right;
  std::vector<std::size_t> marks;

  auto push = [&](double s, double left_value, double right_value) {
    if (!out_grid.empty() && s <= out_grid.back()) return;
    if (left_value != right_value) marks.push_back(out_grid.size());
    out_grid.push_back(s);
    out_left.push_back(left_value);
    out_right.push_back(right_value);
  };

  for (std::size_t j = 0; j < times.size(); ++j) {
    const double t = times[j];
    if (t >= sched.times().back()) break;
    const auto r = grid.residue_of(t);
    if (!r) continue;
    if (*r != i) {
      // A block end whose successor block lies past the trajectory: emit the
      // closing junction from the left limit.
      const auto closing = grid.residue_of(t, Side::left);
      if (closing && *closing == i && t > times.front()) {
        const double s = grid.beta(i, t, Side::left);
        const double next_start = grid.alpha(i, s, Side::right);
        if (next_start > times.back()) {
          const double value =
              grid.impulse_product(i, kAll, s, true, Bounds::closed_open) * x.values_left()[j];
          push(s, value, value);
        }
      }
      continue;
    }
    const double s = grid.beta(i, t);
    const double product = grid.impulse_product(i, kAll, s, true);
    const double value = product * right[j];
    double left_value = value;
    // Junctions inside the initial interval may carry a jump of phi o alpha_i.
    if (s < sched.theta0() && j > 0) {
      const auto js = grid.junctions(i);
      if (std::binary_search(js.begin(), js.end(), s) && s > js.front()) {
        left_value = x.evaluate(grid.alpha(i, s, Side::left), Side::left);
      }
    }
    push(s, left_value, value);
  }
  return Trajectory(std::move(out_grid), std::move(out_left), std::move(out_right),
                    std::move(marks));
}

double junction_mismatch(const WarpGrid& grid, const Trajectory& x, int i) {
  constexpr double kAll = -std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (long k = 0; k <= grid.last_junction(i); ++k) {
    const double s = grid.vartheta(i, k);
    double start = 0.0;
    double end = 0.0;
    try {
      start = grid.block_start(i, k);
      end = grid.block_end(i, k - 1);
    } catch (const ScheduleTooShort&) {
      break;
    }
    if (start > x.back_time()) break;
    if (end < x.front_time()) continue;
    const double after = grid.impulse_product(i, kAll, s, true) * x.evaluate(start, Side::right);
    const double before =
        grid.impulse_product(i, kAll, s, true, Bounds::closed_open) * x.evaluate(end, Side::left);
    worst = std::max(worst, std::abs(after - before));
  }
  return worst;
}

CompanionSystem build_companions(const WarpGrid& grid, const DelaySpec& spec,
                                 const InitialData& init, double horizon) {
  CompanionSystem system;
  const auto& sched = grid.schedule();
  const double theta0 = sched.theta0();
  if (init.t0 != theta0) throw Error("companions are built for the initial time theta_0");
  const auto shared = std::make_shared<const WarpGrid>(grid);
  for (int i = 0; i < grid.residues(); ++i) {
    Companion c;
    c.residue = i;
    c.horizon = grid.warped_horizon(i, horizon);

    const auto tau = spec.tau.fn();
    const auto p = spec.p.fn();
    const auto phi = init.phi;
    const auto& g = shared;

    c.problem.sigma = [g, i, tau](double t, Side side) { return sigma(*g, i, tau, t, side); };
    c.problem.q = [g, i, tau, p](double t, Side side) {
      const double s = sigma(*g, i, tau, t, side);
      const double product = g->impulse_product(
          i, s, t, true, side == Side::right ? Bounds::open_closed : Bounds::closed_open);
      return product * p(g->alpha(i, t, side));
    };
    c.problem.phi = [g, i, phi](double t, Side side) { return phi(g->alpha(i, t, side)); };
    c.problem.t0 = theta0;
    c.problem.history_start = grid.vartheta(i, grid.first_junction());
    for (long k = grid.first_junction() + 1; k <= grid.last_junction(i); ++k) {
      const double s = grid.vartheta(i, k);
      if (s > c.horizon) break;
      if (s < theta0)
        c.problem.history_breaks.push_back(s);
      else if (s > theta0)
        c.problem.breakpoints.push_back(s);
    }
    system.companions.push_back(std::move(c));
  }
  return system;
}

Trajectory reconstruct(const WarpGrid& grid, std::span<const Trajectory> companions,
                       std::span<const double> times) {
  const int residues = grid.residues();
  if (static_cast<int>(companions.size()) != residues) {
    throw RangeError("reconstruct needs " + std::to_string(residues) +
                     " companion trajectories, got " + std::to_string(companions.size()));
  }
  const auto& sched = grid.schedule();
  constexpr double kAll = -std::numeric_limits<double>::infinity();

  double limit = std::numeric_limits<double>::infinity();
  for (int mu = 0; mu < residues; ++mu) {
    const auto& y = companions[static_cast<std::size_t>(mu)];
    if (y.empty()) throw RangeError("companion " + std::to_string(mu) + " is empty");
    limit = std::min(limit, grid.real_extent(mu, y.back_time()));
  }

  std::vector<double> sample;
  if (times.empty()) {
    for (int mu = 0; mu < residues; ++mu) {
      for (double s : companions[static_cast<std::size_t>(mu)].grid()) {
        try {
          sample.push_back(grid.alpha(mu, s, Side::right));
        } catch (const Error&) {
        }
      }
    }
  } else {
    sample.assign(times.begin(), times.end());
  }
  std::sort(sample.begin(), sample.end());
  sample.erase(std::unique(sample.begin(), sample.end()), sample.end());
  std::erase_if(sample, [&](double t) { return t > limit || t < sched.rho(); });

  auto value_at = [&](double t, Side side) {
    const auto mu = grid.residue_of(t, side);
    if (!mu) throw RangeError("reconstruct: no residue block contains t = " + fmt(t));
    const double s = grid.beta(*mu, t, side);
    const auto& y = companions[static_cast<std::size_t>(*mu)];
    if (s < y.front_time() || s > y.back_time()) {
      throw RangeError("reconstruct: companion " + std::to_string(*mu) +
                       " does not cover warped time " + fmt(s));
    }
    const double product =
        t < sched.theta0()
            ? 1.0
            : grid.real_product(*mu, kAll, t, false,
                                side == Side::right ? Bounds::open_closed : Bounds::closed_open);
    return product * y.evaluate(s, side);
  };

  std::vector<double> left;
  std::vector<double> right;
  std::vector<std::size_t> marks;
  left.reserve(sample.size());
  right.reserve(sample.size());
  for (std::size_t j = 0; j < sample.size(); ++j) {
    const double t = sample[j];
    right.push_back(value_at(t, Side::right));
    const auto k = sched.index_of(t);
    if (k && *k >= 0 && t > sched.rho()) {
      left.push_back(value_at(t, Side::left));
      marks.push_back(j);
    } else {
      left.push_back(right.back());
    }
  }
  return Trajectory(std::move(sample), std::move(left), std::move(right), std::move(marks));
}

AssembledEquation build_impulsive_from_companions(const WarpGrid& grid, const ScalarFn& tau,
                                                  std::vector<SidedFn> q,
                                                  std::vector<SidedFn> phi) {
  if (static_cast<int>(q.size()) != grid.residues() ||
      static_cast<int>(phi.size()) != grid.residues()) {
    throw RangeError("one coefficient and one initial function per residue are required");
  }
  const auto g = std::make_shared<const WarpGrid>(grid);
  AssembledEquation eq;
  eq.coefficient = [g, tau, q = std::move(q)](double t, Side side) {
    const auto mu = g->residue_of(t, side);
    if (!mu) throw RangeError("coefficient: t = " + fmt(t) + " outside the schedule");
    const double product = g->real_product(
        *mu, tau(t), t, false, side == Side::right ? Bounds::open_closed : Bounds::closed_open);
    return product * q[static_cast<std::size_t>(*mu)](g->beta(*mu, t, side), side);
  };
  eq.initial = [g, phi = std::move(phi)](double t, Side side) {
    const auto mu = g->residue_of(t, side);
    if (!mu) throw RangeError("initial function: t = " + fmt(t) + " outside the schedule");
    return phi[static_cast<std::size_t>(*mu)](g->beta(*mu, t, side), side);
  };
  return eq;
}

// ---------------------------------------------------------------------------

namespace {

struct Event {
  double time;
  int residue;
  double factor;
};

/// Running sums of |prod| per residue over events in (s, end]; returns the
/// (time, sum) profile including the empty-product baseline at s.
std::vector<std::pair<double, double>> product_profile(std::span<const Event> events, double s,
                                                       double end, int residues) {
  std::vector<double> product(static_cast<std::size_t>(residues), 1.0);
  std::vector<std::pair<double, double>> profile{{s, static_cast<double>(residues)}};
  std::size_t e = 0;
  while (e < events.size() && events[e].time <= s) ++e;
  while (e < events.size() && events[e].time <= end) {
    const double t = events[e].time;
    while (e < events.size() && events[e].time == t) {
      product[static_cast<std::size_t>(events[e].residue)] *= events[e].factor;
      ++e;
    }
    double sum = 0.0;
    for (double v : product) sum += std::abs(v);
    profile.emplace_back(t, sum);
  }
  return profile;
}

ProductBound bound_from(std::span<const std::vector<std::pair<double, double>>> profiles,
                        double start, double end) {
  const double cut = start + 0.75 * (end - start);
  double early = 0.0;
  double all = 0.0;
  for (const auto& profile : profiles) {
    for (const auto& [t, v] : profile) {
      all = std::max(all, v);
      if (t <= cut) early = std::max(early, v);
    }
  }
  return {all, all > early * (1.0 + 1e-9)};
}

}  // namespace

AssumptionReport check_assumptions(const WarpGrid& grid, const DelaySpec& spec, double horizon,
                                   std::size_t samples) {
  const auto& sched = grid.schedule();
  const double theta0 = sched.theta0();
  AssumptionReport report;
  report.horizon = horizon;
  report.samples = samples;
  const int residues = grid.residues();

  std::vector<double> ts = linspace(theta0, horizon, std::max<std::size_t>(samples, 2));
  for (long k = 0; k < sched.last_index(); ++k) {
    const double a = sched.theta(k);
    if (a > horizon) break;
    ts.push_back(a);
    ts.push_back(0.5 * (a + std::min(sched.theta(k + 1), horizon)));
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  for (double t : ts) {
    if (report.a1_ok) {
      double v = 0.0;
      try {
        v = spec.p(t);
      } catch (const std::exception&) {
        v = std::numeric_limits<double>::quiet_NaN();
      }
      if (!std::isfinite(v)) {
        report.a1_ok = false;
        report.a1_witness = t;
      }
    }
    double delayed = 0.0;
    try {
      delayed = spec.tau(t);
    } catch (const std::exception&) {
      delayed = std::numeric_limits<double>::quiet_NaN();
    }
    if (report.a2_ok && !(delayed <= t)) {
      report.a2_ok = false;
      report.a2_witness = t;
    }
    if (report.a5_ok) {
      const auto r = grid.residue_of(t);
      std::optional<int> rd;
      if (std::isfinite(delayed)) rd = grid.residue_of(delayed);
      if (!r || !rd || *r != *rd) {
        report.a5_ok = false;
        report.a5_witness = t;
        report.a5_residue = r;
        std::ostringstream detail;
        detail.precision(17);
        detail << "t = " << t << " lies in a residue-" << (r ? *r : -1)
               << " block but tau(t) = " << delayed;
        if (rd) {
          detail << " lies in a residue-" << *rd << " block";
        } else {
          detail << " precedes the history start " << sched.rho();
        }
        report.a5_detail = detail.str();
      }
    }
  }
  for (double lambda : sched.factors()) {
    if (lambda == 0.0) report.a4_ok = false;
  }

  report.a6_residual.assign(static_cast<std::size_t>(residues), 0.0);
  report.a7_residual.assign(static_cast<std::size_t>(residues), 0.0);
  if (report.a5_ok && report.a2_ok) {
    const auto tau = spec.tau.fn();
    for (int i = 0; i < residues; ++i) {
      const double w_end = grid.warped_horizon(i, horizon);
      auto warped = linspace(theta0, w_end, std::max<std::size_t>(samples, 2));
      double a6 = 0.0;
      for (double t : warped) {
        const double s = sigma(grid, i, tau, t);
        a6 = std::max(a6, std::abs(grid.alpha(i, s) - tau(grid.alpha(i, t))));
      }
      double a7 = 0.0;
      for (double t : ts) {
        if (!grid.chi(i, t)) continue;
        const double b = grid.beta(i, t);
        a7 = std::max(a7, std::abs(sigma(grid, i, tau, b) - grid.beta(i, tau(t))));
      }
      report.a6_residual[static_cast<std::size_t>(i)] = a6;
      report.a7_residual[static_cast<std::size_t>(i)] = a7;
    }
  }

  // Product bounds. Warped events: vartheta_j^k, factor 1/lambda; real events:
  // theta_{j(l+1)+k}, factor lambda.
  double warped_end = std::numeric_limits<double>::infinity();
  for (int i = 0; i < residues; ++i)
    warped_end = std::min(warped_end, grid.warped_horizon(i, horizon));
  std::vector<Event> warped_events;
  std::vector<Event> real_events;
  const long period = sched.period();
  for (int i = 0; i < residues; ++i) {
    const auto js = grid.junctions(i);
    for (long j = 0; j * period + i <= sched.last_index(); ++j) {
      const double lambda = sched.lambda(j * period + i);
      const auto idx = static_cast<std::size_t>(j - grid.first_junction());
      if (idx < js.size() && js[idx] <= warped_end)
        warped_events.push_back({js[idx], i, 1.0 / lambda});
      const double start = sched.theta(j * period + i);
      if (start <= horizon) real_events.push_back({start, i, lambda});
    }
  }
  auto by_time = [](const Event& a, const Event& b) { return a.time < b.time; };
  std::sort(warped_events.begin(), warped_events.end(), by_time);
  std::sort(real_events.begin(), real_events.end(), by_time);

  auto start_points = [&](std::span<const Event> events, double end) {
    std::vector<double> starts{theta0};
    for (const auto& e : events) {
      if (e.time < end) starts.push_back(e.time);
    }
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
    const std::size_t cap = std::max<std::size_t>(samples, 2);
    if (starts.size() > cap) {
      std::vector<double> thinned;
      for (std::size_t m = 0; m < cap; ++m) {
        thinned.push_back(starts[m * (starts.size() - 1) / (cap - 1)]);
      }
      starts = std::move(thinned);
    }
    return starts;
  };

  {
    const auto fixed = product_profile(warped_events, theta0, warped_end, residues);
    report.a9 = bound_from(std::span(&fixed, 1), theta0, warped_end);
    std::vector<std::vector<std::pair<double, double>>> all;
    for (double s : start_points(warped_events, warped_end)) {
      all.push_back(product_profile(warped_events, s, warped_end, residues));
    }
    report.a10 = bound_from(all, theta0, warped_end);
  }
  {
    const auto fixed = product_profile(real_events, theta0, horizon, residues);
    report.a11 = bound_from(std::span(&fixed, 1), theta0, horizon);
    std::vector<std::vector<std::pair<double, double>>> all;
    for (double s : start_points(real_events, horizon)) {
      all.push_back(product_profile(real_events, s, horizon, residues));
    }
    report.a12 = bound_from(all, theta0, horizon);
  }
  return report;
}

}  // namespace ride::warp
