#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcurv/core.hpp"

namespace qcurv {

enum class Command { solve_radial, sweep, solve_axisym, poho_check, asymptotics, oracle2d, threshold_scan };

const char* to_string(Command c);
Command parse_command(const std::string& name);

// Where a resolved setting came from.
enum class Source { fallback, config, flag, derived };

const char* to_string(Source s);

struct RunConfig {
  Command command = Command::solve_radial;

  int n = 3;
  double alpha = 0.0;
  std::optional<double> lambda;
  std::optional<double> lambda_frac;
  std::optional<double> lambda_frac_l1;
  std::optional<double> mu;
  std::vector<double> fractions;
  double lambda_scale = 1.0;
  std::complex<double> zeta{0.0, 0.0};
  bool tilt = true;

  std::size_t nodes = 512;
  std::optional<double> r_max;
  std::optional<double> grading;
  std::size_t angular_nodes = 96;

  double damping = 0.5;
  double tol = 1e-8;
  std::size_t max_iter = 50000;

  std::optional<double> fit_lo;
  std::optional<double> fit_hi;

  std::filesystem::path out_dir = ".";
  std::optional<std::filesystem::path> kernel_cache;
  std::optional<std::filesystem::path> config_file;

  std::map<std::string, Source> provenance;

  /// Lambda after resolving --lambda / --lambda-frac / --lambda-frac-l1.
  double resolved_lambda() const;
  double resolved_mu() const { return mu.value_or(static_cast<double>(n)); }
  ProblemParams params() const;

  /// Resolved settings as {"key": {"value": ..., "source": ...}}.
  nlohmann::json echo() const;
};

// Thrown by parse_and_validate for -h / --help; carries the usage text.
struct HelpRequested {
  std::string text;
};

/// Command line (program name first) merged over an optional JSON config file
/// (--config). Flags win over file keys, unknown keys are rejected.
/// Throws UsageError for anything invalid.
RunConfig parse_and_validate(const std::vector<std::string>& argv);

/// Applies a JSON document with sections problem, grid, solver, output (and an
/// optional top-level "command") to `cfg`, marking touched keys as config-sourced.
void apply_config_json(const nlohmann::json& doc, RunConfig& cfg);

struct RunReport {
  nlohmann::json json;
  int exit_code = 1;
  std::string reason;
  std::vector<std::string> artifacts;
};

/// Dispatches the command, writes its artifacts and report.json into out_dir.
RunReport run(const RunConfig& config);

/// Full CLI entry point: parse, run, map errors to exit codes.
int cli_main(int argc, char** argv);

}  // namespace qcurv
