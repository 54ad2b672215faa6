#include "attsync/so3.hpp"

#include "attsync/errors.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace attsync {

AngleNearPi::AngleNearPi(double angle)
    : Error([angle] {
        std::ostringstream os;
        os << "rotation angle " << angle << " is too close to pi for the logarithm";
        return os.str();
      }()),
      angle_(angle) {}

OutOfDomain::OutOfDomain(const std::string& what, std::optional<std::size_t> agent,
                         std::optional<double> time)
    : Error(what), agent_(agent), time_(time) {}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_rotation(const Eigen::Matrix3d& m) {
  if (!m.allFinite()) return false;
  const double ortho = (m * m.transpose() - Eigen::Matrix3d::Identity()).norm();
  return ortho <= Rotation::kTolerance && std::abs(m.determinant() - 1.0) <= Rotation::kTolerance;
}

}  // namespace

Rotation::Rotation(const Eigen::Matrix3d& m) : m_(m) {
  if (!is_rotation(m)) throw Error("matrix is not in SO(3)");
}

Rotation Rotation::nearest(const Eigen::Matrix3d& m) {
  Eigen::Matrix3d p = polar_orthonormalize(m);
  if (p.determinant() < 0.0) throw Error("matrix has negative determinant; no nearby rotation");
  return Rotation(p);
}

Rotation Rotation::operator*(const Rotation& rhs) const {
  return Rotation(m_ * rhs.m_, Unchecked{});
}

SkewMatrix hat(const AxisAngle& p) {
  Eigen::Matrix3d m;
  m << 0.0, -p.z(), p.y(),
       p.z(), 0.0, -p.x(),
       -p.y(), p.x(), 0.0;
  return SkewMatrix(m);
}

Rotation exp_map(const AxisAngle& p) {
  const double theta2 = p.squaredNorm();
  double a;  // sin(θ)/θ
  double b;  // (1 − cos θ)/θ²
  if (theta2 < kSmallAngle * kSmallAngle) {
    a = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
    b = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
  } else {
    const double theta = std::sqrt(theta2);
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  const Eigen::Matrix3d k = hat(p).matrix();
  return Rotation(Eigen::Matrix3d::Identity() + a * k + b * k * k, Rotation::Unchecked{});
}

AxisAngle log_map(const Rotation& r, double margin) {
  const Eigen::Matrix3d& m = r.matrix();
  const AxisAngle twice_axis_sin{m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1)};
  const double sin_theta = 0.5 * twice_axis_sin.norm();
  const double cos_theta = std::clamp(0.5 * (m.trace() - 1.0), -1.0, 1.0);
  // atan2 equals arccos((tr R − 1)/2) on SO(3) but keeps full precision
  // at both ends of [0, π].
  const double theta = std::atan2(sin_theta, cos_theta);
  if (theta >= std::numbers::pi - margin) throw AngleNearPi(theta);
  if (theta == 0.0) return AxisAngle::Zero();
  double scale;  // θ/(2 sin θ)
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    scale = 0.5 * (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0);
  } else {
    scale = theta / (2.0 * sin_theta);
  }
  return scale * twice_axis_sin;
}

double riemannian_distance(const Rotation& r1, const Rotation& r2, double margin) {
  return log_map(r1.inverse() * r2, margin).norm();
}

double transition_ratio(double theta) {
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    return 1.0 - t2 / 12.0 - t2 * t2 / 720.0;
  }
  const double half = 0.5 * theta;
  return half * std::cos(half) / std::sin(half);
}

TransitionMatrix transition_matrix(const AxisAngle& x) {
  const double theta2 = x.squaredNorm();
  const double theta = std::sqrt(theta2);
  if (!(theta < kTwoPi)) {
    std::ostringstream os;
    os << "axis-angle norm " << theta << " outside the transition-matrix domain [0, 2pi)";
    throw OutOfDomain(os.str());
  }
  const double a = transition_ratio(theta);
  double radial;  // (1 − a)/θ²
  if (theta < kSmallAngle) {
    radial = 1.0 / 12.0 + theta2 / 720.0;
  } else {
    radial = (1.0 - a) / theta2;
  }
  const Eigen::Matrix3d outer = x * x.transpose();
  TransitionMatrix l;
  l.sym = a * Eigen::Matrix3d::Identity() + radial * outer;
  l.skew = 0.5 * hat(x).matrix();
  l.m = l.sym + l.skew;
  return l;
}

Rotation rotation_kinematics_step(const Rotation& r, const Eigen::Vector3d& omega, double h) {
  if (!(h > 0.0)) throw InvalidConfig("rotation step requires h > 0");
  return r * exp_map(h * omega);
}

Eigen::Matrix3d polar_orthonormalize(const Eigen::Matrix3d& m) {
  Eigen::Matrix3d x = m;
  for (int iter = 0; iter < 50; ++iter) {
    const Eigen::Matrix3d next = 0.5 * (x + x.inverse().transpose());
    const double change = (next - x).norm();
    x = next;
    if (change < 1e-15) break;
  }
  return x;
}

RotationIntegrator::RotationIntegrator(const Rotation& initial, std::size_t reorthonormalize_every)
    : r_(initial), every_(reorthonormalize_every) {}

void RotationIntegrator::step(const Eigen::Vector3d& omega, double h) {
  r_ = rotation_kinematics_step(r_, omega, h);
  ++steps_;
  if (every_ != 0 && steps_ % every_ == 0) {
    r_ = Rotation(polar_orthonormalize(r_.m_), Rotation::Unchecked{});
  }
}

}  // namespace attsync
