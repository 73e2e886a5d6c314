// SPDX-License-Identifier: Apache-2.0

#ifndef HANDBALL_RNG_HPP
#define HANDBALL_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace handball {

/// Seedable random source with a platform-stable output sequence.
///
/// The engine (mt19937_64) has a standard-mandated bit stream, and all
/// variate transforms below are implemented directly on top of it instead
/// of going through std::*_distribution, whose output is
/// implementation-defined. Identical seeds therefore produce identical
/// draws on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Derives an independent sub-stream, e.g. per (axis index, trial index).
  static Rng stream(std::uint64_t seed, std::uint64_t lane_a, std::uint64_t lane_b = 0) {
    std::uint64_t s = seed;
    std::uint64_t h = split_mix(s);
    s ^= lane_a + 0x9E3779B97F4A7C15ull;
    h ^= split_mix(s);
    s ^= lane_b + 0xC2B2AE3D27D4EB4Full;
    h ^= split_mix(s);
    return Rng(h);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; consumes exactly two uniforms.
  double gaussian() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Circularly-symmetric complex normal CN(0, 1): unit total variance,
  /// split equally between real and imaginary parts.
  std::complex<double> complex_gaussian() {
    const double r = std::sqrt(-std::log(1.0 - uniform()));  // Rayleigh, E r^2 = 1
    const double phi = 2.0 * M_PI * uniform();
    return {r * std::cos(phi), r * std::sin(phi)};
  }

 private:
  static std::uint64_t split_mix(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace handball

#endif  // HANDBALL_RNG_HPP
