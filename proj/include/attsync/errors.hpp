#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace attsync {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rotation angle too close to π for the logarithm.
class AngleNearPi : public Error {
 public:
  explicit AngleNearPi(double angle);
  double angle() const { return angle_; }

 private:
  double angle_;
};

/// An axis-angle vector left the domain where the transition matrix is
/// defined (‖x‖ < 2π), or a constant was requested outside (0, π).
class OutOfDomain : public Error {
 public:
  explicit OutOfDomain(const std::string& what,
                       std::optional<std::size_t> agent = std::nullopt,
                       std::optional<double> time = std::nullopt);
  std::optional<std::size_t> agent() const { return agent_; }
  std::optional<double> time() const { return time_; }

 private:
  std::optional<std::size_t> agent_;
  std::optional<double> time_;
};

class NotSymmetric : public Error {
 public:
  using Error::Error;
};

class Disconnected : public Error {
 public:
  using Error::Error;
};

class InvalidTopology : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class InsufficientHorizon : public Error {
 public:
  using Error::Error;
};

}  // namespace attsync
