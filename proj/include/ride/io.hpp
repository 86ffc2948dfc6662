#pragma once

// Run configuration, JSON reports and trajectory CSV files.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ride/analysis.hpp"
#include "ride/core.hpp"
#include "ride/warp.hpp"

namespace ride::io {

inline constexpr const char* kSchemaVersion = "1";

/// Malformed configuration; `path` names the offending field, e.g. "impulses.ell".
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& message);
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct RunConfig {
  std::string p;
  std::string tau;
  std::string phi;

  std::string theta_kind = "uniform";  // uniform | explicit
  double theta_start = 0.0;
  double theta_period = 1.0;
  std::vector<double> theta_times;

  std::string lambda_kind = "cyclic";  // cyclic | explicit
  std::vector<double> lambda_values;
  int ell = 0;
  int n_history = 1;

  double horizon = 0.0;
  double step = 1e-3;
  int picard_iters = 2;
  double tol_impulse = 1e-9;

  std::optional<double> t_min;
  std::size_t min_changes = 5;
  double floor = 0.0;
  std::vector<double> eps_list{1e-3, 1e-2, 1e-1};
  std::vector<double> start_times;
  double tail_tol = 1e-3;
  std::size_t assumption_samples = 400;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);
/// Full configuration with every default filled in.
nlohmann::json to_json(const RunConfig& cfg);

/// Builds the schedule, equation and initial data. Expression and schedule
/// problems surface as ConfigError.
analysis::Setup make_setup(const RunConfig& cfg);
analysis::Options make_options(const RunConfig& cfg, std::size_t threads);

nlohmann::json to_json(const warp::AssumptionReport& report);
nlohmann::json to_json(const analysis::OscillationResult& result);
nlohmann::json to_json(const analysis::StabilityTable& table);
nlohmann::json to_json(const analysis::EquivalenceReport& report);

/// Report documents carry schema_version, the echoed config and defaults.
nlohmann::json assumptions_document(const RunConfig& cfg, const warp::AssumptionReport& report);
nlohmann::json analysis_document(const RunConfig& cfg, const analysis::AnalysisReport& report);

/// %.17g
std::string format_number(double v);

/// Header `t,x_left,x_right,is_impulse`, one row per grid point.
void write_impulsive_csv(std::ostream& out, const Trajectory& traj);
/// Header `t,y`, right values.
void write_companion_csv(std::ostream& out, const Trajectory& traj);

Trajectory read_impulsive_csv(std::istream& in);
Trajectory read_companion_csv(std::istream& in);

void write_text(const std::string& path, const std::string& text);

}  // namespace ride::io
