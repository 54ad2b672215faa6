#pragma once

#include "attsync/controllers.hpp"
#include "attsync/state.hpp"

#include <cstddef>

namespace attsync {

struct IntegratorConfig {
  double h = 1e-3;
  double t_max = 10.0;
  SignMode mode = SignMode::Deadband;
  /// Smoothing width for SignMode::Smoothed.
  double epsilon = 1e-6;
  /// Sample every `record_every` steps (the final state is always sampled).
  std::size_t record_every = 1;
  /// Deadband mode only: signum arguments with norm below chatter_factor·h
  /// are scaled down linearly. 0 disables.
  double chatter_factor = 10.0;
  /// Integrate R_i alongside x_i and report the gap between them.
  bool track_rotations = false;
  bool reorthonormalize_rotations = true;

  /// Throws InvalidConfig.
  void validate() const;
  SignOptions sign_options() const;

  bool operator==(const IntegratorConfig&) const = default;
};

/// ẋ = L_x ω(x) with the configured signum realisation. Throws OutOfDomain
/// (with agent and time) if some ‖x_i‖ ≥ 2π.
Eigen::VectorXd closed_loop_velocity(const StackedState& s, const ProtocolConfig& cfg,
                                     const IntegratorConfig& icfg);

/// One explicit Euler step.
StackedState step(const StackedState& s, const ProtocolConfig& cfg, const IntegratorConfig& icfg);

/// Integrates from x0 until t_max. Leaving the transition domain mid-run is
/// recorded as an "out_of_domain" event and ends the run with
/// completed = false. `consensus_tol` sets the "consensus" event threshold.
SimResult simulate(const StackedState& x0, const ProtocolConfig& cfg, const IntegratorConfig& icfg,
                   double consensus_tol = 1e-6);

}  // namespace attsync
