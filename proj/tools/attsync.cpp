// attsync: check, run and sweep attitude synchronization scenarios.

#include "attsync/commands.hpp"
#include "attsync/scenario.hpp"

#include <CLI11.hpp>

#include <cstddef>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace attsync;

struct Source {
  std::string config;
  std::string builtin;
};

void add_source(CLI::App* cmd, Source& src) {
  cmd->add_option("config", src.config, "Scenario JSON file");
  cmd->add_option("--builtin", src.builtin, "Use a compiled-in scenario instead of a file");
}

std::optional<ScenarioFile> resolve(const Source& src) {
  try {
    if (!src.builtin.empty()) return builtin_scenario(src.builtin);
    if (src.config.empty()) {
      std::cerr << "error: a config path or --builtin NAME is required\n";
      return std::nullopt;
    }
    return load_scenario(src.config);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << (src.builtin.empty() ? src.config : src.builtin) << ": " << e.what() << '\n';
    return std::nullopt;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-time attitude synchronization simulator"};
  app.require_subcommand(1);

  Source src;
  std::string out_dir;
  std::size_t trials = 0;
  double max_norm = 0.0;
  unsigned threads = 0;
  std::string show_name;

  auto* check = app.add_subcommand("check", "Print the guarantee report for a scenario");
  add_source(check, src);

  auto* run = app.add_subcommand("run", "Simulate a scenario and write CSV/JSON artifacts");
  add_source(run, src);
  run->add_option("--out", out_dir, "Output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "Run seeded random initial conditions");
  add_source(sweep, src);
  sweep->add_option("--out", out_dir, "Output directory")->required();
  sweep->add_option("--trials", trials, "Number of trials")->required();
  sweep->add_option("--max-norm", max_norm, "Upper bound C on the initial per-agent norm")->required();
  sweep->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");

  auto* list = app.add_subcommand("builtins", "List compiled-in scenarios");
  auto* show = app.add_subcommand("show", "Print a compiled-in scenario as JSON");
  show->add_option("name", show_name, "Builtin scenario name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code::kConfig;
  }

  CommandContext ctx{std::cout, std::cerr, log_level_from_env()};

  if (list->parsed()) {
    for (const auto& n : builtin_names()) std::cout << n << '\n';
    return exit_code::kOk;
  }
  if (show->parsed()) {
    try {
      std::cout << scenario_to_json(builtin_scenario(show_name));
      return exit_code::kOk;
    } catch (const ConfigError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return exit_code::kConfig;
    }
  }

  const std::optional<ScenarioFile> scenario = resolve(src);
  if (!scenario) return exit_code::kConfig;

  try {
    if (check->parsed()) return cmd_check(*scenario, ctx);
    if (run->parsed()) return cmd_run(*scenario, out_dir, ctx);
    return cmd_sweep(*scenario, out_dir, trials, max_norm, ctx, threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code::kConfig;
  }
}
