#pragma once

#include "attsync/so3.hpp"

#include <cstdint>

namespace attsync {

/// SplitMix64: output_k = mix(seed + k·γ). Small, fast and trivially
/// portable, so seeded sweeps reproduce across implementations.
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next() {
    state_ += kGamma;
    return mix(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal via the cosine branch of Box–Muller (two draws each).
  double normal();

 private:
  std::uint64_t state_;
};

/// Generator for trial `trial` of a seeded batch: seeded with the trial-th
/// output of SplitMix64(seed).
SplitMix64 trial_stream(std::uint64_t seed, std::uint64_t trial);

/// Normalised Gaussian direction times a radius uniform on [0, max_norm].
AxisAngle random_axis_angle(SplitMix64& rng, double max_norm);

}  // namespace attsync
