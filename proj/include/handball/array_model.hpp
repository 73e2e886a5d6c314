// SPDX-License-Identifier: Apache-2.0

#ifndef HANDBALL_ARRAY_MODEL_HPP
#define HANDBALL_ARRAY_MODEL_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "handball/config.hpp"
#include "handball/rng.hpp"

namespace handball {

/// One scattering path of a user channel.
struct PathParameters {
  std::complex<double> gain;  // complex path gain
  double aoa = 0.0;           // angle of arrival [rad], in [0, pi)
  double aod = 0.0;           // angle of departure [rad], in [0, pi)
};

/// Narrowband NLoS channel of one user plus its generating path set.
struct UserChannel {
  Eigen::MatrixXcd matrix;            // n_rx x n_tx
  std::vector<PathParameters> paths;  // length n_paths
};

/// Monostatic array snapshot of the target echoes.
struct SensingScene {
  std::vector<double> target_angles;             // LoS directions [rad]
  std::vector<std::complex<double>> rcs;         // radar cross-sections
  std::vector<std::complex<double>> echo_symbols;  // unit-modulus echo symbols
  Eigen::VectorXcd snapshot;                     // length n_tx
};

/// Transmit/receive steering-vector codebooks over a uniform angular grid.
struct Dictionary {
  Eigen::MatrixXcd tx_codebook;  // n_tx x K
  Eigen::MatrixXcd rx_codebook;  // n_rx x K
  std::vector<double> grid;      // K angles [rad]
};

/// ULA response toward `angle` for half-wavelength element spacing.
/// Entry n (0-based) is exp(-j*pi*n*sin(angle)) / sqrt(n_elements); the
/// result has unit Euclidean norm.
Eigen::VectorXcd steering_vector(double angle, int n_elements);

/// ULA response parameterized directly by the spatial frequency sin(angle).
Eigen::VectorXcd steering_vector_from_sin(double sin_angle, int n_elements);

/// Assembles the channel matrix from explicit paths:
///   H = sqrt(n_rx*n_tx/L) * sum_l gain_l * a_rx(aoa_l) * a_tx(aod_l)^H.
UserChannel channel_from_paths(int n_rx, int n_tx, std::vector<PathParameters> paths);

/// Draws a random NLoS channel: angles uniform on [0, pi), gain standard
/// complex Gaussian (one shared gain per user unless cfg.per_path_gains).
UserChannel generate_channel(const SystemConfig& cfg, Rng& rng);

/// Draws the sensing snapshot sum_t rcs_t * a_tx(angle_t) * echo_t + noise
/// with standard complex Gaussian cross-sections, unit-modulus random-phase
/// echo symbols, and per-element noise variance cfg.noise_var.
SensingScene generate_sensing_snapshot(const SystemConfig& cfg,
                                       const std::vector<double>& target_angles, Rng& rng);

/// Builds the codebooks over a uniform grid of cfg.grid_size angles.
/// With the default half-circle grid, points k and K-k alias to the same
/// array response (sin(theta) = sin(pi - theta)); those columns share one
/// sin() evaluation so the aliased atoms are bit-identical and greedy
/// argmax ties resolve deterministically toward the lower index.
Dictionary build_dictionary(const SystemConfig& cfg);

}  // namespace handball

#endif  // HANDBALL_ARRAY_MODEL_HPP
