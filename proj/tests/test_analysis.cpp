#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include "ride/analysis.hpp"
#include "ride/exprdsl.hpp"

using namespace ride;
using namespace ride::analysis;

namespace {

Trajectory sampled(double a, double b, double h, double (*f)(double)) {
  std::vector<double> grid;
  std::vector<double> values;
  for (long j = 0;; ++j) {
    const double t = a + static_cast<double>(j) * h;
    if (t > b) break;
    grid.push_back(t);
    values.push_back(f(t));
  }
  return Trajectory::continuous(grid, values);
}

/// Real root of s + q r e^{-r s} = 0 by bisection, if one exists.
std::optional<double> real_root(double q, double r) {
  auto g = [q, r](double s) { return s + q * r * std::exp(-r * s) / r; };
  // Minimum of s + q e^{-rs} is at s* = log(q r) / r.
  const double s_star = std::log(q * r) / r;
  if (g(s_star) > 0.0) return std::nullopt;
  double lo = s_star;
  double hi = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Root of s + q e^{-s} = 0 near `guess` by complex Newton.
std::complex<double> complex_root(double q, std::complex<double> guess) {
  std::complex<double> s = guess;
  for (int it = 0; it < 100; ++it) {
    const auto f = s + q * std::exp(-s);
    const auto df = 1.0 - q * std::exp(-s);
    s -= f / df;
  }
  return s;
}

Setup example1(int n, int ell, double p, std::vector<double> pattern, std::string phi = "1",
               double until = 200.0) {
  const auto sched = ImpulseSchedule::uniform(0.0, 1.0, pattern, ell, n, until);
  DelaySpec spec{expr::compile(std::to_string(p)),
                 expr::compile("t - " + std::to_string(n * (ell + 1)))};
  const double rho = sched.rho();
  return Setup{spec, sched, InitialData{expr::compile(phi).fn(), 0.0, rho}};
}

Options options(double horizon, double step = 1e-3) {
  Options o;
  o.solve.horizon = horizon;
  o.solve.step = step;
  return o;
}

}  // namespace

TEST_CASE("oracles") {
  CHECK(real_root(0.3, 1.0).has_value());
  CHECK(*real_root(0.3, 1.0) + 0.3 * std::exp(-*real_root(0.3, 1.0)) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK_FALSE(real_root(0.5, 1.0).has_value());
  const auto s = complex_root(1.0, {-0.3, 1.3});
  CHECK(std::abs(s + std::exp(-s)) < 1e-12);
  CHECK(s.real() == doctest::Approx(-0.3181).epsilon(1e-3));
  const auto u = complex_root(2.0, {0.1, 1.6});
  CHECK(std::abs(u + 2.0 * std::exp(-u)) < 1e-12);
  CHECK(u.real() > 0.0);
}

TEST_CASE("sign changes of a sine") {
  const auto x = sampled(0.0, 100.0, 0.01, [](double t) { return std::sin(t); });
  const auto r = detect_oscillation(x, {}, 10.0, 10);
  CHECK(r.verdict == Verdict::oscillatory);
  CHECK(r.count() == 28);  // k pi for k = 4 .. 31
  for (std::size_t k = 0; k < r.count(); ++k) {
    CHECK(r.sign_changes[k] == doctest::Approx((k + 4) * std::numbers::pi).epsilon(1e-5));
  }
  CHECK(std::is_sorted(r.sign_changes.begin(), r.sign_changes.end()));
}

TEST_CASE("positive functions are nonoscillatory") {
  const auto x = sampled(0.0, 20.0, 0.01, [](double t) { return std::exp(-t); });
  const auto r = detect_oscillation(x, {}, 1.0, 5);
  CHECK(r.verdict == Verdict::nonoscillatory);
  CHECK(r.eventual_sign == 1);
  CHECK(r.count() == 0);
  CHECK(detect_oscillation(x, {}, 1.0, 5, 1.0).verdict == Verdict::indeterminate);
}

TEST_CASE("touching zeros count and short windows are indeterminate") {
  const auto x = sampled(0.0, 4.0, 0.5, [](double t) { return (t - 2.0) * (t - 2.0); });
  const auto r = detect_oscillation(x, {}, 0.0, 5);
  CHECK(r.count() == 1);
  CHECK(r.sign_changes[0] == 2.0);
  CHECK(r.verdict == Verdict::indeterminate);
  const auto empty = detect_oscillation(x, {}, 10.0, 5);
  CHECK(empty.verdict == Verdict::indeterminate);
  CHECK_FALSE(empty.note.empty());
}

TEST_CASE("restricted windows glue end to end") {
  // Positive on [0, 1), negative on [1, 2), positive on [2, 3).
  const Trajectory x({0.0, 1.0, 2.0, 3.0}, {1.0, 1.0, -1.0, 1.0}, {1.0, -1.0, 1.0, 1.0}, {1, 2});
  const std::vector<Interval> even{{0.0, 1.0}, {2.0, 3.0}};
  const auto r = detect_oscillation(x, even, 0.0, 1);
  CHECK(r.count() == 0);
  const std::vector<Interval> mixed{{0.0, 1.0}, {1.0, 2.0}};
  const auto m = detect_oscillation(x, mixed, 0.0, 1);
  REQUIRE(m.count() == 1);
  CHECK(m.sign_changes[0] == 1.0);
  const std::vector<Interval> late{{5.0, 6.0}};
  CHECK(detect_oscillation(x, late, 0.0, 1).verdict == Verdict::indeterminate);
}

TEST_CASE("negative factors flip the sign at impulse times") {
  const auto setup = example1(1, 0, 0.2, {-1.0});
  const auto sols = solve_all(setup, options(30.0));
  const auto r = detect_oscillation(sols.impulsive, {}, 5.0, 5);
  CHECK(r.verdict == Verdict::oscillatory);
  // The change at t_min itself lies on the window edge and is not counted.
  for (int k = 6; k <= 30; ++k) {
    CHECK(std::find(r.sign_changes.begin(), r.sign_changes.end(), static_cast<double>(k)) !=
          r.sign_changes.end());
  }
}

TEST_CASE("closed-form criteria") {
  CHECK(criterion_one_over_e(0.5, 1.0));
  CHECK_FALSE(criterion_one_over_e(0.3, 1.0));
  CHECK_FALSE(criterion_one_over_e(1.0 / std::numbers::e, 1.0));
  CHECK(criterion_pi_over_two(1.0, 1.0));
  CHECK_FALSE(criterion_pi_over_two(2.0, 1.0));
  CHECK_FALSE(criterion_pi_over_two(-0.1, 1.0));
  CHECK(criterion_pi_over_two(std::numbers::pi / 2.0, 1.0));
}

TEST_CASE("1/e criterion implies oscillation of the autonomous companion") {
  for (double delay : {1.0, 2.0}) {
    for (double qd : {0.4, 0.5, 0.8, 1.2, 2.0}) {
      const double q = qd / delay;
      REQUIRE(criterion_one_over_e(q, delay));
      solver::SolveConfig cfg;
      cfg.horizon = 100.0 * delay;
      cfg.step = 1e-2;
      const auto y = solver::solve_plain([q](double) { return q; },
                                         [delay](double t) { return t - delay; },
                                         [](double) { return 1.0; }, -delay, 0.0, cfg);
      CHECK(detect_oscillation(y, {}, 5.0 * delay, 5).verdict == Verdict::oscillatory);
    }
  }
}

TEST_CASE("criteria are evaluated on constant-coefficient companions only") {
  const auto setup = example1(1, 1, 0.7, {2.0, 3.0});
  const auto sols = solve_all(setup, options(20.0, 1e-2));
  const auto c = evaluate_criteria(sols.grid, setup.spec, sols.companions);
  REQUIRE(c.size() == 2);
  CHECK(c[0].applicable);
  CHECK(c[0].q == doctest::Approx(0.35));
  CHECK(c[0].delay == doctest::Approx(1.0));
  CHECK(c[1].q == doctest::Approx(0.7 / 3.0));
  CHECK(c[0].pi_over_two);
  CHECK_FALSE(c[1].one_over_e);

  Setup varying = setup;
  varying.spec.p = expr::compile("0.7 + 0.1 * sin(t)");
  const auto v = evaluate_criteria(sols.grid, varying.spec, sols.companions);
  CHECK_FALSE(v[0].applicable);
  CHECK_FALSE(v[0].note.empty());
}

TEST_CASE("stability probes") {
  const std::vector<double> eps{1e-3, 1e-2, 1e-1};
  const std::vector<double> starts{0.0, 3.0, 7.0};
  SUBCASE("frozen dynamics give delta = eps") {
    const auto setup = example1(1, 0, 0.0, {1.0});
    solver::SolveConfig cfg;
    cfg.horizon = 20.0;
    cfg.step = 1e-2;
    const auto t = probe_stability(impulsive_target(setup.spec, setup.sched, cfg), starts, eps,
                                   1e-3, 2);
    for (const auto& row : t.rows) CHECK(row.delta == row.eps);
    CHECK(t.stable);
    CHECK(t.uniform);
    CHECK_FALSE(t.asymptotic);
  }
  SUBCASE("p = 1 is asymptotically stable") {
    const auto setup = example1(1, 0, 1.0, {1.0});
    solver::SolveConfig cfg;
    cfg.horizon = 50.0;
    cfg.step = 1e-3;
    const auto t = probe_stability(impulsive_target(setup.spec, setup.sched, cfg), starts, eps,
                                   1e-3, 3);
    CHECK(t.stable);
    CHECK(t.uniform);
    CHECK(t.asymptotic);
    // delta is proportional to eps for each start.
    for (std::size_t j = 0; j + 1 < t.rows.size(); ++j) {
      if (t.rows[j].start != t.rows[j + 1].start) continue;
      CHECK(t.rows[j + 1].delta / t.rows[j].delta ==
            doctest::Approx(t.rows[j + 1].eps / t.rows[j].eps));
    }
  }
  SUBCASE("p = 2 grows") {
    const auto setup = example1(1, 0, 2.0, {1.0});
    solver::SolveConfig cfg;
    cfg.horizon = 50.0;
    cfg.step = 1e-3;
    const std::vector<double> zero{0.0};
    const auto t = probe_stability(impulsive_target(setup.spec, setup.sched, cfg), zero, eps,
                                   1e-3, 3);
    CHECK_FALSE(t.stable);
    CHECK(t.rows[0].growth_ratio >= 2.0);
  }
  SUBCASE("companion targets run on the warped timeline") {
    const auto setup = example1(1, 1, 0.5, {1.0, 1.0});
    const auto sols = solve_all(setup, options(30.0, 1e-2));
    solver::SolveConfig cfg;
    cfg.step = 1e-2;
    cfg.horizon = 30.0;
    for (const auto& c : sols.companions.companions) {
      const auto target = companion_target(sols.grid, c, cfg);
      CHECK(target.local_start(4.0) == doctest::Approx(2.0));
      CHECK(target.local_start(5.0) == doctest::Approx(c.residue == 1 ? 2.0 : 3.0));
      const auto t = probe_stability(target, starts, eps, 1e-3, 2);
      CHECK(t.stable);
    }
  }
}

TEST_CASE("family members have unit sup-norm") {
  for (auto f : {Family::constant, Family::ramp, Family::cosine}) {
    const auto phi = family_member(f, -2.0, 1.0);
    double sup = 0.0;
    for (double t : linspace(-2.0, 1.0, 301)) sup = std::max(sup, std::abs(phi(t)));
    CHECK(sup == doctest::Approx(1.0));
  }
}

TEST_CASE("equivalence on the self-consistency instance") {
  const auto setup = example1(1, 1, 0.3, {1.0, 1.0});
  const auto opts = options(30.0);
  const auto sols = solve_all(setup, opts);
  const auto eq = verify_equivalence(setup, sols, opts);
  CHECK(eq.reconstruction_deviation <= 1e-3);
  for (const auto& r : eq.residues) {
    CHECK(r.projection_deviation <= 1e-3);
    CHECK(r.verdicts_agree);
  }
  CHECK(eq.overall_agree);
}

TEST_CASE("p = 0 projections are exact") {
  const auto setup = example1(1, 1, 0.0, {2.0, 3.0});
  const auto opts = options(20.0, 1e-2);
  const auto eq = verify_equivalence(setup, solve_all(setup, opts), opts);
  for (const auto& r : eq.residues) CHECK(r.projection_deviation <= 1e-12);
}

TEST_CASE("companions with opposite signs make x oscillatory") {
  // y_0 starts from phi(-1) = 1 and y_1 from phi(0) = -1.
  const auto setup = example1(1, 1, 0.05, {1.0, 1.0}, "-2 * t - 1");
  auto opts = options(30.0, 1e-2);
  const auto sols = solve_all(setup, opts);
  const auto eq = verify_equivalence(setup, sols, opts);
  REQUIRE(eq.residues.size() == 2);
  CHECK(eq.residues[0].companion.verdict == Verdict::nonoscillatory);
  CHECK(eq.residues[1].companion.verdict == Verdict::nonoscillatory);
  CHECK(eq.residues[0].companion.eventual_sign == 1);
  CHECK(eq.residues[1].companion.eventual_sign == -1);
  CHECK(eq.inferred == Verdict::oscillatory);
  CHECK(eq.direct == Verdict::oscillatory);
}

TEST_CASE("verdicts and sign-change times are invariant under positive scaling") {
  const auto base = example1(1, 1, 0.6, {2.0, 0.5});
  Setup scaled = base;
  scaled.init.phi = [](double) { return 3.5; };
  const auto opts = options(30.0, 1e-2);
  const auto a = solve_all(base, opts);
  const auto b = solve_all(scaled, opts);
  const auto ra = detect_oscillation(a.impulsive, {}, 5.0, 5);
  const auto rb = detect_oscillation(b.impulsive, {}, 5.0, 5);
  CHECK(ra.verdict == rb.verdict);
  REQUIRE(ra.count() == rb.count());
  for (std::size_t k = 0; k < ra.count(); ++k) {
    CHECK(ra.sign_changes[k] == doctest::Approx(rb.sign_changes[k]).epsilon(1e-12));
  }
}

TEST_CASE("residue verdicts agree for positive factors") {
  for (int ell = 0; ell <= 2; ++ell) {
    for (double p : {0.2, 0.3, 0.8, 1.5}) {
      std::vector<double> pattern;
      for (int i = 0; i <= ell; ++i) pattern.push_back(1.0 + 0.5 * i);
      const auto setup = example1(1, ell, p, pattern);
      const auto opts = options(40.0, 1e-2);
      const auto eq = verify_equivalence(setup, solve_all(setup, opts), opts);
      for (const auto& r : eq.residues) {
        CHECK_MESSAGE(r.verdicts_agree, "ell=" << ell << " p=" << p << " i=" << r.residue);
      }
    }
  }
}

TEST_CASE("assumption failures abort the equivalence run") {
  auto setup = example1(1, 1, 0.3, {1.0, 1.0});
  setup.spec.tau = expr::compile("t - 1");
  CHECK_THROWS_AS(solve_all(setup, options(20.0, 1e-2)), AssumptionViolation);
}

TEST_CASE("full analysis of an oscillatory unit-schedule instance") {
  const auto setup = example1(1, 0, 0.5, {1.0});
  auto opts = options(100.0);
  opts.threads = 2;
  const auto report = analyze(setup, opts);
  CHECK(report.t_min == doctest::Approx(5.0));
  CHECK(report.oscillation.verdict == Verdict::oscillatory);
  REQUIRE(report.criteria.size() == 1);
  CHECK(report.criteria[0].one_over_e);
  CHECK(report.criteria[0].pi_over_two);
  CHECK(report.stability.asymptotic);
  REQUIRE(report.companion_stability.size() == 1);
  CHECK(report.equivalence.asymptotic_agree.value());
  CHECK(report.equivalence.overall_agree);
}
