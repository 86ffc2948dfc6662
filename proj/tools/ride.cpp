// Command-line front end: check, simulate, analyze, example1.

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ride/analysis.hpp"
#include "ride/exprdsl.hpp"
#include "ride/io.hpp"
#include "ride/parallel.hpp"
#include "ride/solver.hpp"
#include "ride/warp.hpp"

namespace fs = std::filesystem;
using namespace ride;

namespace {

enum Exit { kOk = 0, kConfig = 1, kAssumption = 2, kSolver = 3 };

/// `--out` names a directory unless it ends in the given extension.
std::string output_path(const std::string& out, const std::string& default_name,
                        const std::string& extension) {
  const fs::path p(out);
  if (p.extension() == extension) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p.string();
  }
  fs::create_directories(p);
  return (p / default_name).string();
}

std::string dump(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

warp::AssumptionReport audit(const io::RunConfig& cfg, const analysis::Setup& setup) {
  warp::WarpGrid grid(setup.sched);
  return warp::check_assumptions(grid, setup.spec, cfg.horizon, cfg.assumption_samples);
}

void report_violation(const warp::AssumptionReport& r) {
  if (!r.a2_ok) std::cerr << "A2 violated: tau(t) > t at t = " << *r.a2_witness << "\n";
  if (!r.a4_ok) std::cerr << "A4 violated: an impulse factor is zero\n";
  if (!r.a5_ok) {
    std::cerr << "A5 violated at t = " << io::format_number(*r.a5_witness) << ": " << r.a5_detail
              << "\n";
  }
}

int cmd_check(const std::string& config, const std::string& out) {
  const auto cfg = io::load_config(config);
  const auto setup = io::make_setup(cfg);
  const auto report = audit(cfg, setup);
  io::write_text(output_path(out, "assumptions.json", ".json"),
                 dump(io::assumptions_document(cfg, report)));
  if (!report.passed()) {
    report_violation(report);
    return kAssumption;
  }
  std::cout << "assumptions hold on [" << setup.sched.theta0() << ", " << cfg.horizon << "]\n";
  return kOk;
}

struct Target {
  bool impulsive = false;
  std::vector<int> companions;
};

Target parse_target(const std::string& text, int residues) {
  Target t;
  if (text == "impulsive") {
    t.impulsive = true;
  } else if (text == "all") {
    t.impulsive = true;
    for (int i = 0; i < residues; ++i) t.companions.push_back(i);
  } else if (text.rfind("companion:", 0) == 0) {
    const std::string index = text.substr(10);
    std::size_t used = 0;
    int i = -1;
    try {
      i = std::stoi(index, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != index.size() || index.empty() || i < 0 || i >= residues) {
      throw io::ConfigError("--target", "companion index must be in 0.." +
                                            std::to_string(residues - 1));
    }
    t.companions.push_back(i);
  } else {
    throw io::ConfigError("--target", "expected impulsive, companion:<i> or all");
  }
  return t;
}

void write_csv(const std::string& path, const Trajectory& traj, bool impulsive) {
  std::ostringstream text;
  if (impulsive) io::write_impulsive_csv(text, traj);
  else io::write_companion_csv(text, traj);
  io::write_text(path, text.str());
}

int simulate(const io::RunConfig& cfg, const analysis::Setup& setup, const std::string& target,
             const std::string& out) {
  const auto options = io::make_options(cfg, worker_count());
  const Target t = parse_target(target, setup.sched.period());
  const bool single = !(t.impulsive && !t.companions.empty());
  if (!single && fs::path(out).extension() == ".csv") {
    throw io::ConfigError("--out", "target all writes several files; give a directory");
  }

  if (!t.companions.empty()) {
    const auto report = audit(cfg, setup);
    if (!report.passed()) {
      report_violation(report);
      return kAssumption;
    }
  }
  if (t.impulsive) {
    const auto x = solver::solve_impulsive(setup.spec, setup.sched, setup.init, options.solve);
    write_csv(output_path(out, "impulsive.csv", ".csv"), x, true);
  }
  if (!t.companions.empty()) {
    warp::WarpGrid grid(setup.sched);
    const auto system = warp::build_companions(grid, setup.spec, setup.init, cfg.horizon);
    std::vector<Trajectory> paths(t.companions.size());
    parallel_for(paths.size(), options.threads, [&](std::size_t j) {
      const auto& c = system.companions[static_cast<std::size_t>(t.companions[j])];
      solver::SolveConfig sc = options.solve;
      sc.horizon = c.horizon;
      paths[j] = solver::solve_plain(c.problem, sc);
    });
    for (std::size_t j = 0; j < paths.size(); ++j) {
      const std::string name = "companion_" + std::to_string(t.companions[j]) + ".csv";
      write_csv(output_path(out, name, ".csv"), paths[j], false);
    }
  }
  return kOk;
}

int cmd_simulate(const std::string& config, const std::string& target, const std::string& out) {
  const auto cfg = io::load_config(config);
  const auto setup = io::make_setup(cfg);
  return simulate(cfg, setup, target, out);
}

int analyze(const io::RunConfig& cfg, const analysis::Setup& setup, const std::string& path,
            analysis::AnalysisReport* keep = nullptr) {
  const auto report = audit(cfg, setup);
  if (!report.passed()) {
    auto doc = io::assumptions_document(cfg, report);
    doc["status"] = "assumption-violation";
    io::write_text(path, dump(doc));
    report_violation(report);
    return kAssumption;
  }
  auto result = analysis::analyze(setup, io::make_options(cfg, worker_count()));
  io::write_text(path, dump(io::analysis_document(cfg, result)));
  if (keep) *keep = std::move(result);
  return kOk;
}

int cmd_analyze(const std::string& config, const std::string& out) {
  const auto cfg = io::load_config(config);
  const auto setup = io::make_setup(cfg);
  return analyze(cfg, setup, output_path(out, "analysis.json", ".json"));
}

/// Shortest text that parses back to v.
std::string shortest(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

struct Example1 {
  int n = 1;
  int ell = 0;
  double p = 0.5;
  std::vector<double> lambda{1.0};
  double horizon = 100.0;
  double step = 1e-3;
};

int cmd_example1(const Example1& ex, const std::string& out) {
  if (ex.n < 1) throw io::ConfigError("--n", "must be >= 1");
  if (ex.ell < 0) throw io::ConfigError("--ell", "must be >= 0");
  io::RunConfig cfg;
  cfg.p = shortest(ex.p);
  cfg.tau = "t - " + std::to_string(ex.n * (ex.ell + 1));
  cfg.phi = "1";
  cfg.theta_kind = "uniform";
  cfg.theta_start = 0.0;
  cfg.theta_period = 1.0;
  cfg.lambda_kind = "cyclic";
  cfg.lambda_values = ex.lambda;
  cfg.ell = ex.ell;
  cfg.n_history = ex.n;
  cfg.horizon = ex.horizon;
  cfg.step = ex.step;
  // Round-trip through the parser so the synthesized config gets the same checks.
  cfg = io::parse_config(io::to_json(cfg));

  fs::create_directories(out);
  const fs::path dir(out);
  io::write_text((dir / "config.json").string(), dump(io::to_json(cfg)));
  const auto setup = io::make_setup(cfg);
  const auto assumptions = audit(cfg, setup);
  io::write_text((dir / "assumptions.json").string(),
                 dump(io::assumptions_document(cfg, assumptions)));
  if (!assumptions.passed()) {
    report_violation(assumptions);
    return kAssumption;
  }
  if (const int rc = simulate(cfg, setup, "all", out); rc != kOk) return rc;
  analysis::AnalysisReport report;
  if (const int rc = analyze(cfg, setup, (dir / "analysis.json").string(), &report); rc != kOk) {
    return rc;
  }

  std::cout << "x'(t) + " << cfg.p << " x(" << cfg.tau << ") = 0, l = " << ex.ell
            << ", n = " << ex.n << ", lambda = (";
  for (std::size_t j = 0; j < ex.lambda.size(); ++j) {
    std::cout << (j ? ", " : "") << ex.lambda[j];
  }
  std::cout << "), horizon " << ex.horizon << "\n";
  for (const auto& c : report.criteria) {
    std::cout << "  companion " << c.residue << ": ";
    if (!c.applicable) {
      std::cout << c.note << "\n";
      continue;
    }
    std::cout << "q = " << c.q << ", delay = " << c.delay << ", q*delay > 1/e: "
              << (c.one_over_e ? "yes" : "no") << ", 0 < q*delay <= pi/2: "
              << (c.pi_over_two ? "yes" : "no") << "\n";
  }
  const auto& eq = report.equivalence;
  std::cout << "  impulsive verdict: " << analysis::to_string(report.oscillation.verdict) << " ("
            << report.oscillation.count() << " sign changes after t = " << report.t_min << ")\n";
  std::cout << "  inferred from companions: " << analysis::to_string(eq.inferred) << " ["
            << eq.inference_rule << "]\n";
  for (const auto& r : eq.residues) {
    std::cout << "  residue " << r.residue << ": impulsive "
              << analysis::to_string(r.impulsive.verdict) << ", companion "
              << analysis::to_string(r.companion.verdict)
              << ", projection deviation " << r.projection_deviation << "\n";
  }
  std::cout << "  reconstruction deviation: " << eq.reconstruction_deviation << " (sup|x| = "
            << eq.reconstruction_scale << ")\n";
  std::cout << "  stability surrogates: stable " << report.stability.stable << ", uniform "
            << report.stability.uniform << ", asymptotic " << report.stability.asymptotic << "\n";
  std::cout << "  outputs in " << out << "\n";
  return kOk;
}

template <class Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const io::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const expr::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const AssumptionViolation& e) {
    std::cerr << e.assumption() << " violated at t = " << io::format_number(e.witness()) << ": "
              << e.what() << "\n";
    return kAssumption;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolver;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate and analyze delay equations with retarded impulses"};
  app.require_subcommand(1);

  std::string config;
  std::string out = ".";
  std::string target = "impulsive";

  auto* check = app.add_subcommand("check", "Audit the standing assumptions");
  check->add_option("--config", config, "Run configuration (JSON)")->required();
  check->add_option("--out", out, "Output directory or .json path");

  auto* sim = app.add_subcommand("simulate", "Write trajectories as CSV");
  sim->add_option("--config", config, "Run configuration (JSON)")->required();
  sim->add_option("--out", out, "Output directory or .csv path");
  sim->add_option("--target", target, "impulsive | companion:<i> | all");

  auto* an = app.add_subcommand("analyze", "Oscillation, stability and equivalence report");
  an->add_option("--config", config, "Run configuration (JSON)")->required();
  an->add_option("--out", out, "Output directory or .json path");

  Example1 ex;
  std::string example_out = "example1";
  auto* e1 = app.add_subcommand("example1", "x'(t) + p x(t - n(l+1)) = 0 with cyclic factors");
  e1->add_option("--n", ex.n, "History blocks / delay multiple");
  e1->add_option("--ell", ex.ell, "Retardation depth");
  e1->add_option("--p", ex.p, "Coefficient");
  e1->add_option("--lambda", ex.lambda, "Impulse factors, cycled")->delimiter(',');
  e1->add_option("--horizon", ex.horizon, "Simulation horizon");
  e1->add_option("--step", ex.step, "Step size");
  e1->add_option("--out", example_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  if (*check) return guarded([&] { return cmd_check(config, out); });
  if (*sim) return guarded([&] { return cmd_simulate(config, target, out); });
  if (*an) return guarded([&] { return cmd_analyze(config, out); });
  return guarded([&] { return cmd_example1(ex, example_out); });
}
