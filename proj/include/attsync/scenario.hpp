#pragma once

#include "attsync/controllers.hpp"
#include "attsync/errors.hpp"
#include "attsync/simulator.hpp"
#include "attsync/state.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace attsync {

/// Schema violation in a scenario file. `line` is 1-based; 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, std::string pointer, std::size_t line);
  const std::string& pointer() const { return pointer_; }
  std::size_t line() const { return line_; }
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  std::string pointer_;
  std::size_t line_;
};

struct RandomInit {
  double max_norm = 0.0;
  bool operator==(const RandomInit&) const = default;
};

/// Axis-angle triple, row-major rotation matrix, or "random(C)".
using InitSpec = std::variant<std::array<double, 3>, std::array<double, 9>, RandomInit>;

struct AgentSpec {
  InitSpec init;
  /// Required under protocol 1; absent (or sign_c) under protocol 2.
  std::optional<ControllerKind> controller;
  bool operator==(const AgentSpec&) const = default;
};

/// Closed-form sliding-consensus certification instead of integration.
struct SlidingSpec {
  std::array<double, 3> xbar{};
  double eps1 = 0.5;
  double t0 = 0.0;
  double t_end = 1.0;
  std::size_t samples = 100;
  bool operator==(const SlidingSpec&) const = default;
};

struct ScenarioFile {
  std::string name;
  std::vector<AgentSpec> agents;
  std::vector<Edge> edges;  ///< 0-based here, 1-based in JSON
  int protocol = 1;
  IntegratorConfig integrator;
  double tolerance = 1e-6;
  std::uint64_t seed = 0;
  std::optional<SlidingSpec> sliding;

  bool operator==(const ScenarioFile&) const = default;
};

/// Parses and schema-checks JSON text. Throws ConfigError.
ScenarioFile parse_scenario(std::string_view text);
ScenarioFile load_scenario(const std::filesystem::path& path);

/// Canonical JSON text (2-space indent). parse_scenario inverts it exactly.
std::string scenario_to_json(const ScenarioFile& s);

/// Throws ConfigError for invalid edges or controller combinations.
ProtocolConfig protocol_config(const ScenarioFile& s);

/// Initial state; random agents draw from trial_stream(seed, trial).
StackedState initial_state(const ScenarioFile& s, std::uint64_t trial = 0);

const std::vector<std::string>& builtin_names();
/// Throws ConfigError for unknown names.
ScenarioFile builtin_scenario(const std::string& name);

}  // namespace attsync
