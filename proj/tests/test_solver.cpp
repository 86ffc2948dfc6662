#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ride/solver.hpp"

using namespace ride;
using namespace ride::solver;

namespace {

/// Exact solution of y' + q y(t - 1) = 0, y = 1 on [-1, 0], as polynomials in
/// u = t - k on [k, k+1].
struct StepsOracle {
  explicit StepsOracle(double q, int pieces) {
    std::vector<double> prev{1.0};  // history piece
    for (int k = 0; k < pieces; ++k) {
      const double start = k == 0 ? 1.0 : value(prev, 1.0);
      std::vector<double> next{start};
      for (std::size_t j = 0; j < prev.size(); ++j) {
        next.push_back(-q * prev[j] / static_cast<double>(j + 1));
      }
      polys.push_back(next);
      prev = next;
    }
  }
  static double value(const std::vector<double>& c, double u) {
    double v = 0.0;
    for (std::size_t j = c.size(); j-- > 0;) v = v * u + c[j];
    return v;
  }
  double operator()(double t) const {
    const auto k = std::min(static_cast<std::size_t>(std::floor(t)), polys.size() - 1);
    return value(polys[k], t - static_cast<double>(k));
  }
  std::vector<std::vector<double>> polys;
};

ImpulseSchedule unit_schedule(int ell, std::vector<double> pattern, double until) {
  return ImpulseSchedule::uniform(0.0, 1.0, pattern, ell, 1, until);
}

SolveConfig config(double horizon, double step = 1e-3) {
  SolveConfig cfg;
  cfg.horizon = horizon;
  cfg.step = step;
  return cfg;
}

double error_at(double t, double h) {
  const StepsOracle exact(1.0, 4);
  const auto y = solve_plain([](double) { return 1.0; }, [](double s) { return s - 1.0; },
                             [](double) { return 1.0; }, -1.0, 0.0, config(t, h));
  return std::abs(y.evaluate(t) - exact(t));
}

}  // namespace

TEST_CASE("oracle reproduces the hand solution") {
  const StepsOracle y(1.0, 3);
  CHECK(y(0.5) == doctest::Approx(0.5));
  CHECK(y(1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(y(2.0) == doctest::Approx(-0.5));
  CHECK(y(1.5) == doctest::Approx(-2.0 * 1.5 + 1.5 * 1.5 / 2.0 + 1.5));
}

TEST_CASE("p = 0 impulsive runs are piecewise constant") {
  DelaySpec spec{TimeFunction::constant(0.0), TimeFunction::shift(1.0)};
  SUBCASE("l = 0, lambda = 0.5") {
    const auto sched = unit_schedule(0, {0.5}, 5.0);
    const auto x = solve_impulsive(spec, sched, {[](double) { return 1.0; }, 0.0, -1.0},
                                   config(3.0));
    // Three impulses (k = 0, 1, 2) precede t = 2.5: 0.5^(floor(t)+1).
    CHECK(x.evaluate(2.5) == 0.125);
    CHECK(x.evaluate(0.0) == 0.5);
    CHECK(x.evaluate(1.0, Side::left) == 0.5);
    CHECK(x.evaluate(1.0, Side::right) == 0.25);
  }
  SUBCASE("l = 1, lambda = (2, 3)") {
    const auto sched = unit_schedule(1, {2.0, 3.0}, 8.0);
    spec.tau = TimeFunction::shift(2.0);
    const auto x = solve_impulsive(spec, sched, {[](double) { return 1.0; }, 0.0, -2.0},
                                   config(5.0));
    CHECK(x.evaluate(0.5) == 2.0);
    CHECK(x.evaluate(1.5) == 3.0);
    CHECK(x.evaluate(2.5) == 4.0);
    CHECK(x.evaluate(3.5) == 9.0);
    CHECK(x.evaluate(4.5) == 8.0);
  }
}

TEST_CASE("plain solver examples") {
  SUBCASE("q = 1, delay 1: y(1) = 0") {
    const auto y = solve_plain([](double) { return 1.0; }, [](double t) { return t - 1.0; },
                               [](double) { return 1.0; }, -1.0, 0.0, config(1.0));
    CHECK(std::abs(y.evaluate(1.0)) < 1e-13);
  }
  SUBCASE("q = 0 freezes the initial value") {
    const auto y = solve_plain([](double) { return 0.0; }, [](double t) { return t - 1.0; },
                               [](double t) { return 2.0 + t; }, -1.0, 0.0, config(4.0));
    for (double t : {0.0, 1.0, 2.7, 4.0}) CHECK(y.evaluate(t) == 2.0);
  }
  SUBCASE("zero delay uses Picard sweeps") {
    const auto y = solve_plain([](double) { return 1.0; }, [](double t) { return t; },
                               [](double) { return 1.0; }, 0.0, 0.0, config(1.0));
    CHECK(y.evaluate(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
  }
}

TEST_CASE("second order at the method-of-steps oracle") {
  // Heun is exact on [0, 1] where the right-hand side is constant and on
  // [1, 2] the local error of a quadratic solution vanishes at grid points;
  // t = 2.5 carries the first nonzero error.
  const double coarse = error_at(2.5, 1e-2);
  const double fine = error_at(2.5, 5e-3);
  CHECK(fine > 0.0);
  CHECK(coarse / fine >= 3.5);
  CHECK(error_at(2.0, 1e-2) < 1e-12);
}

TEST_CASE("unit impulses match the plain solver") {
  const double h = 1e-3;
  const double horizon = 10.0;
  DelaySpec spec{TimeFunction::constant(0.8), TimeFunction::shift(1.0)};
  const auto sched = unit_schedule(0, {1.0}, 12.0);
  auto phi = [](double t) { return std::cos(t); };
  const auto x = solve_impulsive(spec, sched, {phi, 0.0, -1.0}, config(horizon, h));
  const auto y = solve_plain([](double) { return 0.8; }, [](double t) { return t - 1.0; }, phi,
                             -1.0, 0.0, config(horizon, h));
  for (double t = 0.0; t <= horizon; t += 0.25) {
    CHECK(std::abs(x.evaluate(t) - y.evaluate(t)) <= 2.0 * h * h * std::max(t, 1.0));
  }
}

TEST_CASE("impulse consistency and grid alignment on random schedules") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> len(0.2, 1.5);
  std::uniform_real_distribution<double> fac(-2.0, 2.0);
  std::uniform_int_distribution<int> ells(0, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const int ell = ells(rng);
    const int history = ell + 1;
    std::vector<double> theta{0.0};
    for (int k = 0; k < history; ++k) theta.insert(theta.begin(), theta.front() - len(rng));
    while (theta.back() < 12.0) theta.push_back(theta.back() + len(rng));
    std::vector<double> lambda;
    for (std::size_t k = history; k < theta.size(); ++k) {
      double f = fac(rng);
      if (std::abs(f) < 0.1) f = 0.5;
      lambda.push_back(f);
    }
    const ImpulseSchedule sched(theta, lambda, ell, 1);
    DelaySpec spec{TimeFunction([](double t) { return 0.5 + 0.3 * std::sin(t); }),
                   TimeFunction([](double t) { return t - 0.7 - 0.2 * std::cos(t); })};
    auto phi = [](double t) { return 1.0 + 0.5 * t; };
    const double horizon = 10.0;
    const double rho = std::min(sched.rho(), compute_rho(spec.tau.fn(), 0.0, horizon, 500));
    const auto x = solve_impulsive(spec, sched, {phi, 0.0, rho}, config(horizon, 1e-2));
    CHECK(impulse_residual(x, sched, phi) <= 1e-9);

    const auto grid = x.grid();
    for (long k = 0; k <= sched.last_index() && sched.theta(k) <= horizon; ++k) {
      CHECK(std::count(grid.begin(), grid.end(), sched.theta(k)) == 1);
    }
    CHECK(std::is_sorted(grid.begin(), grid.end()));
    CHECK(std::adjacent_find(grid.begin(), grid.end()) == grid.end());
  }
}

TEST_CASE("scaling the initial function scales the solution exactly") {
  DelaySpec spec{TimeFunction([](double t) { return 0.7 + 0.2 * std::sin(3.0 * t); }),
                 TimeFunction::shift(2.0)};
  const auto sched = unit_schedule(1, {1.5, -0.5}, 15.0);
  auto phi = [](double t) { return std::exp(t) - 0.3; };
  auto phi2 = [&](double t) { return 2.0 * phi(t); };
  const auto a = solve_impulsive(spec, sched, {phi, 0.0, -2.0}, config(12.0, 1e-2));
  const auto b = solve_impulsive(spec, sched, {phi2, 0.0, -2.0}, config(12.0, 1e-2));
  REQUIRE(a.size() == b.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    CHECK(b.values_right()[j] == 2.0 * a.values_right()[j]);
    CHECK(b.values_left()[j] == 2.0 * a.values_left()[j]);
  }
}

TEST_CASE("solver errors") {
  const auto sched = unit_schedule(0, {1.0}, 5.0);
  auto one = [](double) { return 1.0; };
  SUBCASE("advanced argument") {
    DelaySpec spec{TimeFunction::constant(1.0), TimeFunction([](double t) { return t + 0.5; })};
    CHECK_THROWS_AS(solve_impulsive(spec, sched, {one, 0.0, -1.0}, config(3.0)),
                    AssumptionViolation);
  }
  SUBCASE("schedule exhausted") {
    DelaySpec spec{TimeFunction::constant(1.0), TimeFunction::shift(1.0)};
    CHECK_THROWS_AS(solve_impulsive(spec, sched, {one, 0.0, -1.0}, config(50.0)),
                    ScheduleTooShort);
  }
  SUBCASE("bad configuration") {
    DelaySpec spec{TimeFunction::constant(1.0), TimeFunction::shift(1.0)};
    SolveConfig cfg = config(3.0, -1.0);
    CHECK_THROWS_AS(solve_impulsive(spec, sched, {one, 0.0, -1.0}, cfg), Error);
    cfg = config(3.0);
    cfg.picard_iters = 0;
    CHECK_THROWS_AS(solve_impulsive(spec, sched, {one, 0.0, -1.0}, cfg), Error);
  }
  SUBCASE("non-finite coefficient") {
    DelaySpec spec{TimeFunction([](double t) { return t > 1.0 ? NAN : 1.0; }),
                   TimeFunction::shift(1.0)};
    CHECK_THROWS_AS(solve_impulsive(spec, sched, {one, 0.0, -1.0}, config(3.0)), Error);
  }
}
