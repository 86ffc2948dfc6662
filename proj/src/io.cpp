#include "ride/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ride/exprdsl.hpp"

namespace ride::io {

using nlohmann::json;

ConfigError::ConfigError(const std::string& path, const std::string& message)
    : Error(path.empty() ? message : path + ": " + message), path_(path) {}

namespace {

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

const json& member(const json& obj, const std::string& parent, const std::string& key) {
  if (!obj.is_object()) throw ConfigError(parent, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(join(parent, key), "missing field");
  return *it;
}

const json* optional_member(const json& obj, const std::string& key) {
  const auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path, "must be finite");
  return d;
}

double positive(const json& v, const std::string& path) {
  const double d = number(v, path);
  if (!(d > 0.0)) throw ConfigError(path, "must be positive");
  return d;
}

long integer(const json& v, const std::string& path, long min) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  const long n = v.get<long>();
  if (n < min) throw ConfigError(path, "must be >= " + std::to_string(min));
  return n;
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t j = 0; j < v.size(); ++j) {
    out.push_back(number(v[j], path + "[" + std::to_string(j) + "]"));
  }
  return out;
}

/// Accepts either a literal number or expression text.
std::string expression(const json& v, const std::string& path) {
  if (v.is_number()) return format_number(number(v, path));
  return text(v, path);
}

TimeFunction compile_field(const std::string& src, const std::string& path) {
  try {
    return expr::compile(src);
  } catch (const expr::ParseError& e) {
    throw ConfigError(path, e.what());
  }
}

}  // namespace

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  const auto& eq = member(doc, "", "equation");
  cfg.p = expression(member(eq, "equation", "p"), "equation.p");
  cfg.tau = expression(member(eq, "equation", "tau"), "equation.tau");

  const auto& imp = member(doc, "", "impulses");
  cfg.ell = static_cast<int>(integer(member(imp, "impulses", "ell"), "impulses.ell", 0));
  if (const auto* n = optional_member(imp, "n_history")) {
    cfg.n_history = static_cast<int>(integer(*n, "impulses.n_history", 1));
  }
  const auto& theta = member(imp, "impulses", "theta");
  cfg.theta_kind = text(member(theta, "impulses.theta", "kind"), "impulses.theta.kind");
  if (cfg.theta_kind == "uniform") {
    cfg.theta_start = number(member(theta, "impulses.theta", "start"), "impulses.theta.start");
    cfg.theta_period =
        positive(member(theta, "impulses.theta", "period"), "impulses.theta.period");
  } else if (cfg.theta_kind == "explicit") {
    cfg.theta_times = numbers(member(theta, "impulses.theta", "times"), "impulses.theta.times");
  } else {
    throw ConfigError("impulses.theta.kind", "expected \"uniform\" or \"explicit\"");
  }
  const auto& lambda = member(imp, "impulses", "lambda");
  cfg.lambda_kind = text(member(lambda, "impulses.lambda", "kind"), "impulses.lambda.kind");
  if (cfg.lambda_kind != "cyclic" && cfg.lambda_kind != "explicit") {
    throw ConfigError("impulses.lambda.kind", "expected \"cyclic\" or \"explicit\"");
  }
  cfg.lambda_values =
      numbers(member(lambda, "impulses.lambda", "values"), "impulses.lambda.values");
  if (cfg.lambda_values.empty()) throw ConfigError("impulses.lambda.values", "must not be empty");
  for (std::size_t j = 0; j < cfg.lambda_values.size(); ++j) {
    if (cfg.lambda_values[j] == 0.0) {
      throw ConfigError("impulses.lambda.values[" + std::to_string(j) + "]", "must be nonzero");
    }
  }
  if (cfg.lambda_kind == "cyclic" &&
      (cfg.ell + 1) % static_cast<int>(cfg.lambda_values.size()) != 0) {
    throw ConfigError("impulses.lambda.values",
                      "cyclic list length must divide ell + 1 = " + std::to_string(cfg.ell + 1));
  }

  const auto& init = member(doc, "", "initial");
  cfg.phi = expression(member(init, "initial", "phi"), "initial.phi");

  const auto& sim = member(doc, "", "simulate");
  cfg.horizon = number(member(sim, "simulate", "horizon"), "simulate.horizon");
  if (const auto* v = optional_member(sim, "step")) cfg.step = positive(*v, "simulate.step");
  if (const auto* v = optional_member(sim, "picard_iters")) {
    cfg.picard_iters = static_cast<int>(integer(*v, "simulate.picard_iters", 1));
  }
  if (const auto* v = optional_member(sim, "tol_impulse")) {
    cfg.tol_impulse = number(*v, "simulate.tol_impulse");
    if (cfg.tol_impulse < 0.0) throw ConfigError("simulate.tol_impulse", "must be >= 0");
  }

  if (const auto* an = optional_member(doc, "analysis")) {
    if (!an->is_object()) throw ConfigError("analysis", "expected an object");
    if (const auto* v = optional_member(*an, "t_min")) cfg.t_min = number(*v, "analysis.t_min");
    if (const auto* v = optional_member(*an, "min_changes")) {
      cfg.min_changes = static_cast<std::size_t>(integer(*v, "analysis.min_changes", 1));
    }
    if (const auto* v = optional_member(*an, "floor")) cfg.floor = number(*v, "analysis.floor");
    if (const auto* v = optional_member(*an, "eps_list")) {
      cfg.eps_list = numbers(*v, "analysis.eps_list");
      for (std::size_t j = 0; j < cfg.eps_list.size(); ++j) {
        positive(json(cfg.eps_list[j]), "analysis.eps_list[" + std::to_string(j) + "]");
      }
    }
    if (const auto* v = optional_member(*an, "start_times")) {
      cfg.start_times = numbers(*v, "analysis.start_times");
    }
    if (const auto* v = optional_member(*an, "tail_tol")) {
      cfg.tail_tol = positive(*v, "analysis.tail_tol");
    }
    if (const auto* v = optional_member(*an, "assumption_samples")) {
      cfg.assumption_samples =
          static_cast<std::size_t>(integer(*v, "analysis.assumption_samples", 2));
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
  json theta;
  theta["kind"] = cfg.theta_kind;
  if (cfg.theta_kind == "uniform") {
    theta["start"] = cfg.theta_start;
    theta["period"] = cfg.theta_period;
  } else {
    theta["times"] = cfg.theta_times;
  }
  json doc;
  doc["equation"] = {{"p", cfg.p}, {"tau", cfg.tau}};
  doc["impulses"] = {{"theta", theta},
                     {"lambda", {{"kind", cfg.lambda_kind}, {"values", cfg.lambda_values}}},
                     {"ell", cfg.ell},
                     {"n_history", cfg.n_history}};
  doc["initial"] = {{"phi", cfg.phi}};
  doc["simulate"] = {{"horizon", cfg.horizon},
                     {"step", cfg.step},
                     {"picard_iters", cfg.picard_iters},
                     {"tol_impulse", cfg.tol_impulse}};
  doc["analysis"] = {{"t_min", cfg.t_min ? json(*cfg.t_min) : json(nullptr)},
                     {"min_changes", cfg.min_changes},
                     {"floor", cfg.floor},
                     {"eps_list", cfg.eps_list},
                     {"start_times", cfg.start_times},
                     {"tail_tol", cfg.tail_tol},
                     {"assumption_samples", cfg.assumption_samples}};
  return doc;
}

analysis::Setup make_setup(const RunConfig& cfg) {
  DelaySpec spec{compile_field(cfg.p, "equation.p"), compile_field(cfg.tau, "equation.tau")};
  const TimeFunction phi = compile_field(cfg.phi, "initial.phi");

  const long period = cfg.ell + 1;
  const long history = cfg.n_history * period;
  std::vector<double> theta;
  if (cfg.theta_kind == "uniform") {
    const double until = cfg.horizon + 3.0 * static_cast<double>(period) * cfg.theta_period;
    for (long k = -history;; ++k) {
      const double t = cfg.theta_start + static_cast<double>(k) * cfg.theta_period;
      theta.push_back(t);
      if (k >= 0 && t > until) break;
    }
  } else {
    theta = cfg.theta_times;
  }
  const long impulses = static_cast<long>(theta.size()) - history;
  std::vector<double> lambda;
  if (cfg.lambda_kind == "cyclic") {
    for (long k = 0; k < impulses; ++k) {
      lambda.push_back(cfg.lambda_values[static_cast<std::size_t>(k) % cfg.lambda_values.size()]);
    }
  } else {
    lambda = cfg.lambda_values;
  }

  std::optional<ImpulseSchedule> sched;
  try {
    sched.emplace(std::move(theta), std::move(lambda), cfg.ell, cfg.n_history);
  } catch (const InvalidSchedule& e) {
    throw ConfigError("impulses", e.what());
  }
  if (!(cfg.horizon > sched->theta0())) {
    throw ConfigError("simulate.horizon", "must exceed theta_0");
  }
  if (!sched->covers(cfg.horizon)) {
    throw ConfigError("impulses.theta.times", "the schedule must extend past the horizon");
  }
  double rho = sched->theta0();
  try {
    rho = std::min(rho, compute_rho(spec.tau.fn(), sched->theta0(), cfg.horizon, 1001));
  } catch (const EvaluationError& e) {
    throw ConfigError("equation.tau", e.what());
  }
  InitialData init{phi.fn(), sched->theta0(), rho};
  return analysis::Setup{std::move(spec), std::move(*sched), std::move(init)};
}

analysis::Options make_options(const RunConfig& cfg, std::size_t threads) {
  analysis::Options o;
  o.solve.step = cfg.step;
  o.solve.horizon = cfg.horizon;
  o.solve.picard_iters = cfg.picard_iters;
  o.solve.tol_impulse = cfg.tol_impulse;
  o.t_min = cfg.t_min;
  o.min_changes = cfg.min_changes;
  o.floor = cfg.floor;
  o.eps_list = cfg.eps_list;
  o.start_times = cfg.start_times;
  o.tail_tol = cfg.tail_tol;
  o.assumption_samples = cfg.assumption_samples;
  o.threads = threads;
  return o;
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json bound(const warp::ProductBound& b) {
  return {{"sup", finite_or_null(b.sup)}, {"growing", b.growing}};
}

}  // namespace

json to_json(const warp::AssumptionReport& r) {
  json doc;
  doc["horizon"] = r.horizon;
  doc["samples"] = r.samples;
  doc["passed"] = r.passed();
  doc["A1"] = {{"ok", r.a1_ok}, {"witness", optional_number(r.a1_witness)}};
  doc["A2"] = {{"ok", r.a2_ok}, {"witness", optional_number(r.a2_witness)}};
  doc["A4"] = {{"ok", r.a4_ok}};
  doc["A5"] = {{"ok", r.a5_ok},
               {"witness", optional_number(r.a5_witness)},
               {"residue", r.a5_residue ? json(*r.a5_residue) : json(nullptr)},
               {"detail", r.a5_detail}};
  doc["A6_residual"] = r.a6_residual;
  doc["A7_residual"] = r.a7_residual;
  doc["A9"] = bound(r.a9);
  doc["A10"] = bound(r.a10);
  doc["A11"] = bound(r.a11);
  doc["A12"] = bound(r.a12);
  return doc;
}

json to_json(const analysis::OscillationResult& r) {
  return {{"verdict", analysis::to_string(r.verdict)},
          {"count", r.count()},
          {"sign_changes", r.sign_changes},
          {"eventual_sign", r.eventual_sign},
          {"note", r.note}};
}

json to_json(const analysis::StabilityTable& t) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    rows.push_back({{"eps", row.eps},
                    {"delta", finite_or_null(row.delta)},
                    {"start", row.start},
                    {"sup_abs", row.sup_abs},
                    {"tail_abs", row.tail_abs},
                    {"amplification", finite_or_null(row.amplification)},
                    {"growth_ratio", finite_or_null(row.growth_ratio)}});
  }
  return {{"rows", rows},
          {"stable_surrogate", t.stable},
          {"uniform_surrogate", t.uniform},
          {"asymptotic_surrogate", t.asymptotic},
          {"tail_tol", t.tail_tol}};
}

json to_json(const analysis::EquivalenceReport& r) {
  json residues = json::array();
  for (const auto& e : r.residues) {
    residues.push_back({{"residue", e.residue},
                        {"projection_deviation", e.projection_deviation},
                        {"projection_scale", e.projection_scale},
                        {"junction_mismatch", e.junction_mismatch},
                        {"impulsive", to_json(e.impulsive)},
                        {"companion", to_json(e.companion)},
                        {"verdicts_agree", e.verdicts_agree}});
  }
  auto flag = [](const std::optional<bool>& b) { return b ? json(*b) : json(nullptr); };
  return {{"reconstruction_deviation", r.reconstruction_deviation},
          {"reconstruction_scale", r.reconstruction_scale},
          {"residues", residues},
          {"positive_factors", r.positive_factors},
          {"direct", analysis::to_string(r.direct)},
          {"inferred", analysis::to_string(r.inferred)},
          {"inference_rule", r.inference_rule},
          {"overall_agree", r.overall_agree},
          {"stable_agree", flag(r.stable_agree)},
          {"uniform_agree", flag(r.uniform_agree)},
          {"asymptotic_agree", flag(r.asymptotic_agree)}};
}

namespace {

json defaults(const RunConfig& cfg, std::optional<double> t_min) {
  return {{"step", cfg.step},
          {"picard_iters", cfg.picard_iters},
          {"tol_impulse", cfg.tol_impulse},
          {"t_min", t_min ? json(*t_min) : json(nullptr)},
          {"min_changes", cfg.min_changes},
          {"floor", cfg.floor},
          {"eps_list", cfg.eps_list},
          {"tail_tol", cfg.tail_tol},
          {"assumption_samples", cfg.assumption_samples}};
}

}  // namespace

json assumptions_document(const RunConfig& cfg, const warp::AssumptionReport& report) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["config"] = to_json(cfg);
  doc["defaults"] = defaults(cfg, cfg.t_min);
  doc["assumptions"] = to_json(report);
  return doc;
}

json analysis_document(const RunConfig& cfg, const analysis::AnalysisReport& report) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["config"] = to_json(cfg);
  doc["defaults"] = defaults(cfg, report.t_min);
  doc["assumptions"] = to_json(report.assumptions);
  doc["oscillation"] = to_json(report.oscillation);
  json criteria = json::array();
  for (const auto& c : report.criteria) {
    criteria.push_back({{"residue", c.residue},
                        {"applicable", c.applicable},
                        {"q", c.q},
                        {"delay", c.delay},
                        {"one_over_e", c.one_over_e},
                        {"pi_over_two", c.pi_over_two},
                        {"note", c.note}});
  }
  doc["criteria"] = criteria;
  doc["stability"] = to_json(report.stability);
  json companions = json::array();
  for (const auto& t : report.companion_stability) companions.push_back(to_json(t));
  doc["companion_stability"] = companions;
  doc["equivalence"] = to_json(report.equivalence);
  return doc;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_impulsive_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,x_left,x_right,is_impulse\n";
  const auto grid = traj.grid();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    out << format_number(grid[j]) << ',' << format_number(traj.values_left()[j]) << ','
        << format_number(traj.values_right()[j]) << ',' << (traj.is_impulse(j) ? 1 : 0) << '\n';
  }
}

void write_companion_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,y\n";
  const auto grid = traj.grid();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    out << format_number(grid[j]) << ',' << format_number(traj.values_right()[j]) << '\n';
  }
}

namespace {

std::vector<std::vector<std::string>> read_rows(std::istream& in, const std::string& header,
                                                std::size_t columns) {
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw Error("CSV header must be \"" + header + "\"");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != columns) {
      throw Error("CSV row " + std::to_string(rows.size() + 2) + " has " +
                  std::to_string(cells.size()) + " columns, expected " + std::to_string(columns));
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw Error("malformed number in CSV: " + s);
  return v;
}

}  // namespace

Trajectory read_impulsive_csv(std::istream& in) {
  std::vector<double> grid;
  std::vector<double> left;
  std::vector<double> right;
  std::vector<std::size_t> marks;
  for (const auto& row : read_rows(in, "t,x_left,x_right,is_impulse", 4)) {
    if (row[3] == "1") marks.push_back(grid.size());
    else if (row[3] != "0") throw Error("is_impulse must be 0 or 1");
    grid.push_back(parse_double(row[0]));
    left.push_back(parse_double(row[1]));
    right.push_back(parse_double(row[2]));
  }
  return Trajectory(std::move(grid), std::move(left), std::move(right), std::move(marks));
}

Trajectory read_companion_csv(std::istream& in) {
  std::vector<double> grid;
  std::vector<double> values;
  for (const auto& row : read_rows(in, "t,y", 2)) {
    grid.push_back(parse_double(row[0]));
    values.push_back(parse_double(row[1]));
  }
  return Trajectory::continuous(std::move(grid), std::move(values));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("failed writing " + path);
}

}  // namespace ride::io
