#pragma once

#include "attsync/graph.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace attsync {

/// sign(w) = w/‖w‖, the direction-preserving signum.
struct SignDirectional {
  bool operator==(const SignDirectional&) const = default;
};

/// sign_c(w), componentwise signum.
struct SignComponentwise {
  bool operator==(const SignComponentwise&) const = default;
};

/// f(y) = gain·y, optionally rescaled so that ‖f(y)‖ ≤ saturation.
struct LipschitzDirectional {
  double gain = 1.0;
  std::optional<double> saturation;
  bool operator==(const LipschitzDirectional&) const = default;
};

using ControllerKind = std::variant<SignDirectional, SignComponentwise, LipschitzDirectional>;

std::string controller_name(const ControllerKind& kind);

enum class Protocol {
  /// ω_i = f_i(Σ_j (x_j − x_i)), one ControllerKind per agent.
  DirectionPreserving = 1,
  /// ω_i = Σ_j sign_c(x_j − x_i).
  Componentwise = 2,
};

/// Closed-loop controller configuration. Protocols are mutually exclusive:
/// the per-agent kinds are only meaningful for the direction-preserving one.
class ProtocolConfig {
 public:
  /// Throws InvalidConfig if kinds.size() != topology.size().
  static ProtocolConfig direction_preserving(Topology topology, std::vector<ControllerKind> kinds);
  static ProtocolConfig componentwise(Topology topology);

  const Topology& topology() const { return topology_; }
  Protocol protocol() const { return protocol_; }
  const std::vector<ControllerKind>& kinds() const { return kinds_; }
  std::size_t agent_count() const { return topology_.size(); }

  /// Indices of the agents with a Lipschitz controller (the set I_c).
  std::vector<std::size_t> lipschitz_agents() const;

 private:
  ProtocolConfig(Topology topology, Protocol protocol, std::vector<ControllerKind> kinds);

  Topology topology_;
  Protocol protocol_;
  std::vector<ControllerKind> kinds_;
};

enum class SignMode { Deadband, Smoothed };

/// How signum discontinuities are realised numerically.
///
/// Deadband: arguments with norm below `deadband` map to 0; above that but
/// below `chatter_band` the output is w/chatter_band (0 disables the band).
/// Smoothed: w/max(‖w‖, epsilon).
struct SignOptions {
  SignMode mode = SignMode::Deadband;
  double deadband = 1e-9;
  double epsilon = 1e-6;
  double chatter_band = 0.0;
};

Eigen::VectorXd sign_directional(const Eigen::VectorXd& w, const SignOptions& opts = {});
Eigen::VectorXd sign_componentwise(const Eigen::VectorXd& w, const SignOptions& opts = {});
double sign_scalar(double w, const SignOptions& opts = {});

/// Neighbour disagreement Σ_j w_ij (x_j − x_i) = −(L̂x)_i for agent i.
Eigen::Vector3d disagreement(const Eigen::VectorXd& x, const Topology& t, std::size_t i);

Eigen::Vector3d apply_controller(const ControllerKind& kind, const Eigen::Vector3d& arg,
                                 const SignOptions& opts = {});

/// Stacked ω for the direction-preserving protocol.
Eigen::VectorXd control_protocol1(const Eigen::VectorXd& x, const ProtocolConfig& cfg,
                                  const SignOptions& opts = {});

/// Stacked ω for the componentwise protocol, Σ_j w_ij sign_c(x_j − x_i).
Eigen::VectorXd control_protocol2(const Eigen::VectorXd& x, const ProtocolConfig& cfg,
                                  const SignOptions& opts = {});

/// Dispatches on cfg.protocol().
Eigen::VectorXd control(const Eigen::VectorXd& x, const ProtocolConfig& cfg,
                        const SignOptions& opts = {});

struct GuaranteeReport {
  bool invariance_s1 = false;
  bool finite_time = false;
  bool asymptotic_only = false;
  bool sliding_risk = false;
  std::string notes;
};

/// Which of the invariance / finite-time results apply to cfg. Throws
/// Disconnected if the graph is not connected.
GuaranteeReport validate_guarantees(const ProtocolConfig& cfg);

}  // namespace attsync
