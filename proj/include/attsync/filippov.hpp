#pragma once

#include "attsync/controllers.hpp"
#include "attsync/state.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <optional>

namespace attsync {

/// Signum arguments below this norm are treated as exactly zero, where the
/// Filippov set of sign is the closed unit ball and that of sign_c is [−1, 1].
inline constexpr double kFilippovZero = 1e-9;

struct MembershipReport {
  /// Distance-like measure to the Filippov set; 0 means ν is a member.
  double residual = 0.0;
  /// Agent with the largest residual.
  std::optional<std::size_t> worst_agent;
};

/// Measures how far ν is from L_x·𝓕[ω](x).
///
/// ω_i = L_{x_i}⁻¹ ν_i is recovered per agent (L_x is invertible for
/// ‖x_i‖ < 2π). Direction-preserving protocol: sign agents must give the
/// unit direction of their disagreement, or lie in the unit ball when it
/// vanishes; Lipschitz agents must match f_i exactly. Componentwise
/// protocol: for every coordinate, edge values in {±1} or [−1, 1] must
/// reproduce ω; feasibility of the tied edges is a bounded-flow problem,
/// and the residual is the unmet flow. Throws OutOfDomain.
MembershipReport filippov_residual(const StackedState& x, const Eigen::VectorXd& nu,
                                   const ProtocolConfig& cfg);

bool filippov_membership(const StackedState& x, const Eigen::VectorXd& nu, const ProtocolConfig& cfg,
                         double tol);

/// 𝟙 ⊗ ((t − t0)·eps1·x̄/‖x̄‖ + x̄): consensus drifting radially at speed eps1,
/// a Filippov solution of the all-sign protocol. Throws InvalidConfig if
/// x̄ = 0 or eps1 ∉ (0, 1).
StackedState sliding_consensus_trajectory(const AxisAngle& xbar, double eps1, double t0, double t,
                                          std::size_t n = 3);

/// Time derivative of sliding_consensus_trajectory (constant).
Eigen::VectorXd sliding_consensus_velocity(const AxisAngle& xbar, double eps1, std::size_t n = 3);

/// Time at which every agent's norm reaches π: t0 + (π − ‖x̄‖)/eps1.
double sliding_crossing_time(const AxisAngle& xbar, double eps1, double t0);

}  // namespace attsync
