#include "attsync/random.hpp"

#include <cmath>
#include <numbers>

namespace attsync {

double SplitMix64::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

SplitMix64 trial_stream(std::uint64_t seed, std::uint64_t trial) {
  return SplitMix64(SplitMix64::mix(seed + (trial + 1) * SplitMix64::kGamma));
}

AxisAngle random_axis_angle(SplitMix64& rng, double max_norm) {
  AxisAngle dir;
  do {
    dir = {rng.normal(), rng.normal(), rng.normal()};
  } while (dir.norm() < 1e-12);
  return max_norm * rng.uniform() * dir.normalized();
}

}  // namespace attsync
