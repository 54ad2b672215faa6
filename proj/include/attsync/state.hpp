#pragma once

#include "attsync/so3.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace attsync {

/// x = [x_1ᵀ … x_nᵀ]ᵀ at time t.
struct StackedState {
  Eigen::VectorXd x;
  double t = 0.0;

  static StackedState from_agents(const std::vector<AxisAngle>& agents, double t = 0.0);
  /// 𝟙 ⊗ xbar.
  static StackedState consensus(std::size_t n, const AxisAngle& xbar, double t = 0.0);

  std::size_t agents() const { return static_cast<std::size_t>(x.size() / 3); }
  AxisAngle agent(std::size_t i) const { return x.segment<3>(static_cast<Eigen::Index>(3 * i)); }
  double max_norm() const;
};

struct Event {
  double time = 0.0;
  std::string kind;
  std::optional<std::size_t> agent;
  std::string detail;
};

/// Time-sampled trajectory plus diagnostic channels, all sampled on `times`.
struct SimResult {
  std::vector<double> times;
  std::vector<StackedState> states;
  std::map<std::string, std::vector<double>> channels;
  std::vector<Event> events;
  /// False when the run stopped early (e.g. leaving the transition domain).
  bool completed = true;

  const std::vector<double>& channel(const std::string& name) const;
  std::optional<Event> first_event(const std::string& kind) const;
};

}  // namespace attsync
