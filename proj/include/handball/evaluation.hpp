// SPDX-License-Identifier: Apache-2.0

#ifndef HANDBALL_EVALUATION_HPP
#define HANDBALL_EVALUATION_HPP

#include <string>
#include <vector>

#include "handball/beamforming.hpp"

namespace handball {

struct EvalOptions {
  // Literal link-budget mode: fold the quantizer into the signal and
  // interference terms only (Q(b s) ~ W b s) and drop the separate
  // distortion power from the SIQNR denominator.
  bool strict_siqnr = false;
  // Also aggregate the interference-free fully digital benchmark per trial.
  bool with_fd = false;
};

struct LinkMetrics {
  std::vector<double> siqnr;          // linear, per user
  std::vector<double> per_user_rate;  // bits/s/Hz
  double sum_rate = 0.0;              // bits/s/Hz
};

/// Per-user signal to interference, quantization and noise ratio:
///   num_u = (p_s/U) |c_u^H H_u A W b_u|^2
///   den_u = (p_s/U) sum_{k != u} |c_u^H H_u A W b_k|^2
///           + c_u^H H_u A Sigma A^H H_u^H c_u + noise_var ||c_u||^2.
std::vector<double> siqnr_per_user(const HybridBeamformer& bf,
                                   const std::vector<UserChannel>& channels,
                                   const QuantizationModel& model, const SystemConfig& cfg,
                                   const EvalOptions& opts = {});

/// Sum rate sum_u log2(1 + SIQNR_u) plus the per-user terms.
LinkMetrics sum_rate(const HybridBeamformer& bf, const std::vector<UserChannel>& channels,
                     const QuantizationModel& model, const SystemConfig& cfg,
                     const EvalOptions& opts = {});

struct Beampattern {
  std::vector<double> angles;   // radians
  std::vector<double> gain_db;  // normalized, peak at 0 dB

  bool operator==(const Beampattern&) const = default;
};

/// Radiated power versus angle from the transmit covariance
///   R_x = (p_s/U) A W B B^H W^H A^H + A Sigma A^H,
/// normalized so the peak sits at 0 dB.
Beampattern transmit_beampattern(const HybridBeamformer& bf, const QuantizationModel& model,
                                 const SystemConfig& cfg, const std::vector<double>& grid);

/// Default evaluation grid: 1 degree steps over [0, 180] degrees.
std::vector<double> default_pattern_grid();

/// Interference-free fully digital benchmark: per user the unconstrained
/// SVD/MMSE pair with no inter-user terms, summed over users [bits/s/Hz].
double fd_benchmark(const std::vector<UserChannel>& channels, const SystemConfig& cfg);

/// Optional pinned scene for a trial; empty vectors mean "draw randomly".
/// Fixed users get a single scattering path at the given departure angle.
struct FixedScenario {
  std::vector<double> user_aod;       // radians, size n_users when set
  std::vector<double> target_angles;  // radians, size n_targets when set
};

/// One fully designed transmitter instance.
struct DesignedSystem {
  std::vector<UserChannel> channels;
  SensingScene scene;
  HybridBeamformer beamformer;
  BasebandDesign baseband;
};

/// Draws a scenario, runs the greedy analog design and the quantization-
/// aware baseband design. A prebuilt dictionary may be passed to amortize
/// codebook construction across trials.
DesignedSystem design_trial(const SystemConfig& cfg, const FixedScenario& fixed, Rng& rng,
                            const Dictionary* dict = nullptr);

struct SweepAxis {
  std::string name;            // snr_db | bits | eta | n_users | n_targets
  std::vector<double> values;  // bits may contain +inf for the unquantized DAC

  bool operator==(const SweepAxis&) const = default;
};

struct SweepResult {
  std::string axis_name;
  std::vector<double> axis_values;
  std::vector<double> mean_se;  // bits/s/Hz, over completed trials
  std::vector<double> std_se;   // sample standard deviation
  std::vector<double> mean_fd_se;  // filled when EvalOptions::with_fd
  std::vector<double> std_fd_se;
  std::vector<int> skipped;  // design failures per axis value
  int n_trials = 0;
  SystemConfig config_snapshot;

  bool operator==(const SweepResult&) const = default;
};

/// Applies one axis value to a base configuration. snr_db adjusts the noise
/// variance with p_s fixed; n_users/n_targets also update n_rf.
SystemConfig apply_axis(const SystemConfig& base, const std::string& axis, double value);

/// Seeded Monte-Carlo sweep: for every axis value and trial, draws a fresh
/// scenario from the sub-stream (seed, axis index, trial index), designs the
/// transmitter, and aggregates the spectral efficiency. Trials whose design
/// fails are skipped and counted; a value with no completed trials reports
/// NaN. Throws if every trial of every value failed.
SweepResult run_sweep(const SystemConfig& base, const SweepAxis& axis, int n_trials,
                      const EvalOptions& opts = {});

}  // namespace handball

#endif  // HANDBALL_EVALUATION_HPP
