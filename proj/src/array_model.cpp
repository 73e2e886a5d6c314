// SPDX-License-Identifier: Apache-2.0

#include "handball/array_model.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "handball/errors.hpp"

namespace handball {

Eigen::VectorXcd steering_vector_from_sin(double sin_angle, int n_elements) {
  if (n_elements < 1) throw std::invalid_argument("steering_vector: n_elements must be >= 1");
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_elements));
  const double spatial_freq = M_PI * sin_angle;
  Eigen::VectorXcd a(n_elements);
  for (int n = 0; n < n_elements; ++n) a[n] = std::polar(scale, -spatial_freq * n);
  return a;
}

Eigen::VectorXcd steering_vector(double angle, int n_elements) {
  return steering_vector_from_sin(std::sin(angle), n_elements);
}

UserChannel channel_from_paths(int n_rx, int n_tx, std::vector<PathParameters> paths) {
  if (paths.empty()) throw std::invalid_argument("channel_from_paths: at least one path required");
  const double kappa =
      std::sqrt(static_cast<double>(n_rx) * static_cast<double>(n_tx) / paths.size());
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n_rx, n_tx);
  for (const PathParameters& p : paths)
    h.noalias() += p.gain * steering_vector(p.aoa, n_rx) * steering_vector(p.aod, n_tx).adjoint();
  return {kappa * h, std::move(paths)};
}

UserChannel generate_channel(const SystemConfig& cfg, Rng& rng) {
  cfg.validate();
  std::vector<PathParameters> paths(cfg.n_paths);
  // One complex gain per user, shared by all paths; per_path_gains switches
  // to independent gains.
  const std::complex<double> shared_gain =
      cfg.per_path_gains ? std::complex<double>{} : rng.complex_gaussian();
  for (PathParameters& p : paths) {
    p.gain = cfg.per_path_gains ? rng.complex_gaussian() : shared_gain;
    p.aoa = rng.uniform(0.0, M_PI);
    p.aod = rng.uniform(0.0, M_PI);
  }
  return channel_from_paths(cfg.n_rx, cfg.n_tx, paths);
}

SensingScene generate_sensing_snapshot(const SystemConfig& cfg,
                                       const std::vector<double>& target_angles, Rng& rng) {
  if (static_cast<int>(target_angles.size()) != cfg.n_targets)
    throw std::invalid_argument("generate_sensing_snapshot: expected n_targets angles");
  for (double a : target_angles)
    if (!(a >= 0.0 && a < M_PI))
      throw std::invalid_argument("generate_sensing_snapshot: target angle outside [0, pi)");

  SensingScene scene;
  scene.target_angles = target_angles;
  scene.snapshot = Eigen::VectorXcd::Zero(cfg.n_tx);
  for (double angle : target_angles) {
    const std::complex<double> rcs = rng.complex_gaussian();
    const std::complex<double> echo = std::polar(1.0, rng.uniform(0.0, 2.0 * M_PI));
    scene.rcs.push_back(rcs);
    scene.echo_symbols.push_back(echo);
    scene.snapshot += rcs * echo * steering_vector(angle, cfg.n_tx);
  }
  const double noise_amp = std::sqrt(cfg.noise_var);
  for (int n = 0; n < cfg.n_tx; ++n) scene.snapshot[n] += noise_amp * rng.complex_gaussian();
  return scene;
}

Dictionary build_dictionary(const SystemConfig& cfg) {
  if (cfg.grid_size < cfg.n_rf)
    throw std::invalid_argument("build_dictionary: grid_size must be >= n_rf");
  const int k_total = cfg.grid_size;
  const double span = cfg.full_circle_grid ? 2.0 * M_PI : M_PI;

  std::vector<double> sines(k_total);
  if (cfg.full_circle_grid) {
    for (int k = 0; k < k_total; ++k) sines[k] = std::sin(span * k / k_total);
  } else {
    // Grid points k and K-k alias to the same spatial frequency; evaluate
    // sin() once per pair so the aliased columns are bit-identical.
    for (int k = 0; k <= k_total / 2; ++k) sines[k] = std::sin(M_PI * k / k_total);
    for (int k = k_total / 2 + 1; k < k_total; ++k) sines[k] = sines[k_total - k];
  }

  Dictionary dict;
  dict.grid.resize(k_total);
  dict.tx_codebook.resize(cfg.n_tx, k_total);
  dict.rx_codebook.resize(cfg.n_rx, k_total);
  for (int k = 0; k < k_total; ++k) {
    dict.grid[k] = span * k / k_total;
    dict.tx_codebook.col(k) = steering_vector_from_sin(sines[k], cfg.n_tx);
    dict.rx_codebook.col(k) = steering_vector_from_sin(sines[k], cfg.n_rx);
  }
  return dict;
}

}  // namespace handball
