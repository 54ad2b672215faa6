#pragma once

#include "attsync/analysis.hpp"
#include "attsync/controllers.hpp"
#include "attsync/scenario.hpp"
#include "attsync/state.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace attsync {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kCaveat = 1;
inline constexpr int kConfig = 2;
inline constexpr int kDomain = 3;
}  // namespace exit_code

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

/// Reads ATTSYNC_LOG (error | info | debug); defaults to error.
LogLevel log_level_from_env();

struct CommandContext {
  std::ostream& out;
  std::ostream& err;
  LogLevel level = LogLevel::Error;
};

/// Everything a scenario run produces before it is written out.
struct RunOutcome {
  SimResult result;
  GuaranteeReport guarantees;
  std::optional<RateConstants> rates;
  ConvergenceClass convergence;
  std::optional<bool> settling_bound_met;
  bool v1_nonincreasing = false;
  bool v3_nonincreasing = false;
  /// Closed-form sliding scenarios only.
  std::optional<double> membership_residual;
  std::optional<double> crossing_time;
  std::optional<double> predicted_crossing_time;
  std::string diagnostics_json;
  std::string guarantees_json;
  int exit_code = exit_code::kOk;
};

/// Simulates (or, with a `sliding` block, evaluates the closed form of) the
/// scenario and derives diagnostics. Throws ConfigError / Disconnected.
RunOutcome run_scenario(const ScenarioFile& s);

std::string guarantees_to_json(const GuaranteeReport& r);

/// Prints the guarantee report; 0 iff finite-time convergence is guaranteed.
int cmd_check(const ScenarioFile& s, CommandContext& ctx);

/// Writes trajectory.csv, channels.csv, diagnostics.json and guarantees.json
/// into out_dir.
int cmd_run(const ScenarioFile& s, const std::filesystem::path& out_dir, CommandContext& ctx);

/// Runs `trials` seeded random initial conditions with per-agent norm at most
/// max_norm; writes summary.json and trials.csv into out_dir.
int cmd_sweep(const ScenarioFile& s, const std::filesystem::path& out_dir, std::size_t trials,
              double max_norm, CommandContext& ctx, unsigned threads = 0);

/// Monotonicity of a sampled series, allowing rises of at most `tol` per sample.
bool nonincreasing(const std::vector<double>& series, double tol);

}  // namespace attsync
