// SPDX-License-Identifier: Apache-2.0

#include "handball/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "handball/errors.hpp"

namespace handball {

std::vector<double> siqnr_per_user(const HybridBeamformer& bf,
                                   const std::vector<UserChannel>& channels,
                                   const QuantizationModel& model, const SystemConfig& cfg,
                                   const EvalOptions& opts) {
  const int n_users = cfg.n_users;
  std::vector<double> siqnr(n_users);
  for (int u = 0; u < n_users; ++u) {
    // Effective row after combining and analog precoding, then the DAC gain.
    const Eigen::RowVectorXcd e = bf.combiners.col(u).adjoint() * channels[u].matrix * bf.analog;
    const Eigen::RowVectorXcd ew = e * model.gain;
    const double share = cfg.p_s / n_users;
    const double signal = share * std::norm((ew * bf.baseband.col(u))(0));
    double interference = 0.0;
    for (int k = 0; k < n_users; ++k) {
      if (k == u) continue;
      interference += share * std::norm((ew * bf.baseband.col(k))(0));
    }
    double distortion = 0.0;
    if (!opts.strict_siqnr)
      distortion = std::max(0.0, std::real((e * model.distortion_cov * e.adjoint())(0, 0)));
    const double noise = cfg.noise_var * bf.combiners.col(u).squaredNorm();
    siqnr[u] = signal / (interference + distortion + noise);
  }
  return siqnr;
}

LinkMetrics sum_rate(const HybridBeamformer& bf, const std::vector<UserChannel>& channels,
                     const QuantizationModel& model, const SystemConfig& cfg,
                     const EvalOptions& opts) {
  LinkMetrics metrics;
  metrics.siqnr = siqnr_per_user(bf, channels, model, cfg, opts);
  metrics.per_user_rate.reserve(metrics.siqnr.size());
  for (double s : metrics.siqnr) {
    const double rate = std::log2(1.0 + s);
    metrics.per_user_rate.push_back(rate);
    metrics.sum_rate += rate;
  }
  return metrics;
}

Beampattern transmit_beampattern(const HybridBeamformer& bf, const QuantizationModel& model,
                                 const SystemConfig& cfg, const std::vector<double>& grid) {
  const Eigen::MatrixXcd awb = bf.analog * model.gain * bf.baseband;
  Eigen::MatrixXcd r_x = (cfg.p_s / cfg.n_users) * awb * awb.adjoint() +
                         bf.analog * model.distortion_cov * bf.analog.adjoint();
  r_x = 0.5 * (r_x + r_x.adjoint());

  Beampattern pattern;
  pattern.angles = grid;
  std::vector<double> power(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Eigen::VectorXcd a = steering_vector(grid[i], cfg.n_tx);
    power[i] = std::max(0.0, std::real((a.adjoint() * r_x * a)(0, 0)));
  }
  const double peak = *std::max_element(power.begin(), power.end());
  pattern.gain_db.resize(power.size());
  for (std::size_t i = 0; i < power.size(); ++i)
    pattern.gain_db[i] = 10.0 * std::log10(power[i] / peak);
  return pattern;
}

std::vector<double> default_pattern_grid() {
  std::vector<double> grid(181);
  for (int deg = 0; deg <= 180; ++deg) grid[deg] = deg * M_PI / 180.0;
  return grid;
}

double fd_benchmark(const std::vector<UserChannel>& channels, const SystemConfig& cfg) {
  double total = 0.0;
  for (const UserChannel& ch : channels) {
    if (!(ch.matrix.norm() > 0.0)) continue;
    const Eigen::VectorXcd f = unconstrained_precoder(ch);
    const Eigen::VectorXcd v = unconstrained_combiner(ch, f, cfg.p_s, cfg.noise_var);
    const double signal = (cfg.p_s / cfg.n_users) * std::norm(v.dot(ch.matrix * f));
    const double noise = cfg.noise_var * v.squaredNorm();
    total += std::log2(1.0 + signal / noise);
  }
  return total;
}

DesignedSystem design_trial(const SystemConfig& cfg, const FixedScenario& fixed, Rng& rng,
                            const Dictionary* dict) {
  cfg.validate();
  Dictionary local;
  if (dict == nullptr) {
    local = build_dictionary(cfg);
    dict = &local;
  }

  DesignedSystem sys;
  sys.channels.reserve(cfg.n_users);
  if (fixed.user_aod.empty()) {
    for (int u = 0; u < cfg.n_users; ++u) sys.channels.push_back(generate_channel(cfg, rng));
  } else {
    if (static_cast<int>(fixed.user_aod.size()) != cfg.n_users)
      throw std::invalid_argument("design_trial: expected n_users fixed departure angles");
    for (int u = 0; u < cfg.n_users; ++u) {
      // Pinned users are single-path so the beam serves exactly the
      // requested direction.
      PathParameters path{rng.complex_gaussian(), rng.uniform(0.0, M_PI), fixed.user_aod[u]};
      sys.channels.push_back(channel_from_paths(cfg.n_rx, cfg.n_tx, {path}));
    }
  }

  std::vector<double> target_angles = fixed.target_angles;
  if (target_angles.empty()) {
    target_angles.resize(cfg.n_targets);
    for (double& a : target_angles) a = rng.uniform(0.0, M_PI);
  }
  sys.scene = generate_sensing_snapshot(cfg, target_angles, rng);

  sys.beamformer = design_analog(sys.channels, sys.scene, *dict, cfg);
  sys.baseband = design_baseband(sys.beamformer, sys.channels, cfg);
  return sys;
}

SystemConfig apply_axis(const SystemConfig& base, const std::string& axis, double value) {
  SystemConfig cfg = base;
  if (axis == "snr_db") {
    cfg.noise_var = cfg.p_s / std::pow(10.0, value / 10.0);
  } else if (axis == "bits") {
    cfg.bits = std::isinf(value) ? kInfiniteBits : static_cast<int>(std::lround(value));
  } else if (axis == "eta") {
    cfg.eta = value;
  } else if (axis == "n_users") {
    cfg.n_users = static_cast<int>(std::lround(value));
    cfg.n_rf = cfg.n_users + cfg.n_targets;
  } else if (axis == "n_targets") {
    cfg.n_targets = static_cast<int>(std::lround(value));
    cfg.n_rf = cfg.n_users + cfg.n_targets;
  } else {
    throw std::invalid_argument("unknown sweep axis: " + axis);
  }
  return cfg;
}

SweepResult run_sweep(const SystemConfig& base, const SweepAxis& axis, int n_trials,
                      const EvalOptions& opts) {
  if (axis.values.empty()) throw std::invalid_argument("run_sweep: empty axis");
  if (n_trials < 1) throw std::invalid_argument("run_sweep: n_trials must be >= 1");

  SweepResult result;
  result.axis_name = axis.name;
  result.axis_values = axis.values;
  result.n_trials = n_trials;
  result.config_snapshot = base;

  bool any_completed = false;
  for (std::size_t ai = 0; ai < axis.values.size(); ++ai) {
    const SystemConfig cfg = apply_axis(base, axis.name, axis.values[ai]);
    cfg.validate();
    const Dictionary dict = build_dictionary(cfg);

    std::vector<double> se;
    std::vector<double> fd;
    int skipped = 0;
    for (int trial = 0; trial < n_trials; ++trial) {
      Rng rng = Rng::stream(cfg.seed, ai, trial);
      try {
        const DesignedSystem sys = design_trial(cfg, {}, rng, &dict);
        se.push_back(sum_rate(sys.beamformer, sys.channels, sys.baseband.model, cfg, opts).sum_rate);
        if (opts.with_fd) fd.push_back(fd_benchmark(sys.channels, cfg));
      } catch (const DesignError&) {
        ++skipped;
      }
    }

    auto mean_std = [](const std::vector<double>& xs) {
      if (xs.empty())
        return std::pair<double, double>{std::numeric_limits<double>::quiet_NaN(),
                                         std::numeric_limits<double>::quiet_NaN()};
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= xs.size();
      double var = 0.0;
      for (double x : xs) var += (x - mean) * (x - mean);
      var = xs.size() > 1 ? var / (xs.size() - 1) : 0.0;
      return std::pair<double, double>{mean, std::sqrt(var)};
    };

    const auto [m, s] = mean_std(se);
    result.mean_se.push_back(m);
    result.std_se.push_back(s);
    if (opts.with_fd) {
      const auto [fm, fs] = mean_std(fd);
      result.mean_fd_se.push_back(fm);
      result.std_fd_se.push_back(fs);
    }
    result.skipped.push_back(skipped);
    if (!se.empty()) any_completed = true;
  }

  if (!any_completed) throw DesignError("run_sweep: every trial of every axis value failed");
  return result;
}

}  // namespace handball
