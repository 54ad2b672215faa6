#pragma once

#include "attsync/graph.hpp"
#include "attsync/state.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>

namespace attsync {

/// The three Lyapunov candidates used in the convergence arguments.
struct LyapunovChannels {
  double v1 = 0.0;            ///< max_i ‖x_i‖²
  double v2 = 0.0;            ///< √(xᵀ L̂ x)
  double v3 = 0.0;            ///< ½ xᵀx
  double disagreement = 0.0;  ///< max over edges of ‖x_i − x_j‖
};

LyapunovChannels lyapunov_channels(const Eigen::VectorXd& x, const Topology& t);

/// Smallest eigenvalue of sym(L_x) over the ball ‖x‖ ≤ C, i.e. the largest c₁
/// with L_x − c₁I ≥ 0 there. Equals (C/2)cot(C/2). Throws OutOfDomain
/// unless 0 < C < π.
double c1_bound(double max_norm);

struct RateConstants {
  double c1 = 1.0;
  double lambda2 = 0.0;
  /// Upper bound on dV2/dt away from consensus.
  double slope_bound = 0.0;
  /// V2(0)/|slope_bound|.
  double settling_bound = 0.0;
};

/// Throws Disconnected, or OutOfDomain if max_i ‖x_i(0)‖ ≥ π.
RateConstants rate_constants(const StackedState& x0, const Topology& t);

enum class ConvergenceKind { FiniteTime, Asymptotic, None };

struct ConvergenceClass {
  ConvergenceKind kind = ConvergenceKind::None;
  /// First sample time with disagreement < tol (FiniteTime only).
  std::optional<double> settle_time;
  /// Least-squares fit of log V2 against t over the second half of the run.
  double log_slope = 0.0;
  double fit_residual = 0.0;

  std::string label() const;
};

/// finite_time(T_c) if the disagreement channel drops below tol at T_c and
/// stays below 2·tol; asymptotic if log V2 decays along a line (RMS residual
/// < 0.1) and V2 is still above tol at the end; none otherwise.
/// Throws InsufficientHorizon if fewer than two samples exist or the run ends
/// before `required_horizon`.
ConvergenceClass classify_convergence(const SimResult& result, double tol,
                                      std::optional<double> required_horizon = std::nullopt);

}  // namespace attsync
