#pragma once

#include <Eigen/Core>

#include <cstddef>

namespace attsync {

/// Axis-angle vector: direction is the rotation axis, norm the angle (rad).
using AxisAngle = Eigen::Vector3d;

/// Angular margin below π where the logarithm refuses to evaluate.
inline constexpr double kDefaultLogMargin = 1e-7;

/// Below this angle the trigonometric ratios switch to Taylor series.
inline constexpr double kSmallAngle = 1e-4;

/// Element of so(3). Only produced by hat(), so skew symmetry is structural.
class SkewMatrix {
 public:
  const Eigen::Matrix3d& matrix() const { return m_; }
  AxisAngle vee() const { return {m_(2, 1), m_(0, 2), m_(1, 0)}; }

 private:
  explicit SkewMatrix(const Eigen::Matrix3d& m) : m_(m) {}
  friend SkewMatrix hat(const AxisAngle& p);

  Eigen::Matrix3d m_;
};

/// Element of SO(3). Construction checks orthogonality and det = +1 to 1e-9.
class Rotation {
 public:
  Rotation() : m_(Eigen::Matrix3d::Identity()) {}
  explicit Rotation(const Eigen::Matrix3d& m);

  static Rotation identity() { return {}; }
  /// Projects an arbitrary near-rotation onto SO(3) (polar factor).
  static Rotation nearest(const Eigen::Matrix3d& m);

  const Eigen::Matrix3d& matrix() const { return m_; }
  Rotation inverse() const { return Rotation(m_.transpose(), Unchecked{}); }
  Rotation operator*(const Rotation& rhs) const;

  static constexpr double kTolerance = 1e-9;

 private:
  struct Unchecked {};
  Rotation(const Eigen::Matrix3d& m, Unchecked) : m_(m) {}
  friend Rotation exp_map(const AxisAngle& p);
  friend class RotationIntegrator;

  Eigen::Matrix3d m_;
};

/// L_x = L¹ + x̂/2, the map from body angular velocity to axis-angle rate.
struct TransitionMatrix {
  Eigen::Matrix3d m;
  Eigen::Matrix3d sym;
  Eigen::Matrix3d skew;
};

SkewMatrix hat(const AxisAngle& p);

/// Rodrigues' formula.
Rotation exp_map(const AxisAngle& p);

/// Inverse of exp_map on the open ball of radius π. Throws AngleNearPi when
/// the rotation angle is ≥ π − margin.
AxisAngle log_map(const Rotation& r, double margin = kDefaultLogMargin);

/// Geodesic distance (1/√2)‖log(R1ᵀR2)‖_F, i.e. the relative rotation angle.
double riemannian_distance(const Rotation& r1, const Rotation& r2,
                           double margin = kDefaultLogMargin);

/// (θ/2)·cot(θ/2) = sinc(θ)/sinc²(θ/2): the repeated eigenvalue of sym(L_x)
/// at ‖x‖ = θ. Valid for θ ∈ [0, 2π).
double transition_ratio(double theta);

/// Transition matrix for ‖x‖ < 2π; throws OutOfDomain otherwise.
TransitionMatrix transition_matrix(const AxisAngle& x);

/// R·exp(h·ω̂): exact step for a body-frame angular velocity held constant
/// over the interval.
Rotation rotation_kinematics_step(const Rotation& r, const Eigen::Vector3d& omega, double h);

/// Newton iteration R ← ½(R + R⁻ᵀ) for the orthogonal polar factor.
Eigen::Matrix3d polar_orthonormalize(const Eigen::Matrix3d& m);

/// Accumulates rotation_kinematics_step and re-projects onto SO(3) every
/// `reorthonormalize_every` steps (0 disables).
class RotationIntegrator {
 public:
  explicit RotationIntegrator(const Rotation& initial, std::size_t reorthonormalize_every = 1000);

  void step(const Eigen::Vector3d& omega, double h);
  const Rotation& rotation() const { return r_; }
  std::size_t steps() const { return steps_; }

 private:
  Rotation r_;
  std::size_t every_;
  std::size_t steps_ = 0;
};

}  // namespace attsync
