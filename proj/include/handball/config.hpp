// SPDX-License-Identifier: Apache-2.0

#ifndef HANDBALL_CONFIG_HPP
#define HANDBALL_CONFIG_HPP

#include <cstdint>
#include <limits>

namespace handball {

/// Marker value for an unquantized (infinite-resolution) DAC. It compares
/// greater than every finite bit depth, so ordering sweeps over
/// {1, 2, 3, 4, inf} works with plain integer comparison.
inline constexpr int kInfiniteBits = std::numeric_limits<int>::max();

inline constexpr bool is_infinite_bits(int bits) { return bits == kInfiniteBits; }

/// Scenario dimensions and powers for one transmitter design.
///
/// Defaults reproduce the reference simulation scale: a 128-antenna
/// transmitter with 10-antenna users, three users, three targets, five
/// scattering paths, a 1-degree transmit/receive codebook, and unit symbol
/// and budget power at 10 dB SNR.
struct SystemConfig {
  int n_tx = 128;       // transmit antennas
  int n_rx = 10;        // receive antennas per user
  int n_users = 3;      // communication users U
  int n_targets = 3;    // sensing targets T
  int n_rf = 6;         // RF chains; must equal n_users + n_targets
  int n_paths = 5;      // NLoS scattering paths per user
  int grid_size = 180;  // codebook size K
  int bits = kInfiniteBits;
  double p_s = 1.0;       // symbol power [W]
  double p_max = 1.0;     // transmit power budget [W]
  double noise_var = 0.1; // receiver noise variance [W]
  double eta = 0.5;       // communication-sensing trade-off in [0, 1]
  std::uint64_t seed = 1;

  // Extensions beyond the baseline model. per_path_gains draws an
  // independent complex gain per scattering path instead of one shared
  // gain per user; full_circle_grid spans the codebook over [0, 2*pi)
  // instead of the default [0, pi).
  bool per_path_gains = false;
  bool full_circle_grid = false;

  /// Throws SpecValidationError naming the offending field.
  void validate() const;

  bool operator==(const SystemConfig&) const = default;
};

}  // namespace handball

#endif  // HANDBALL_CONFIG_HPP
