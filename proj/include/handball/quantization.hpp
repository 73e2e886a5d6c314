// SPDX-License-Identifier: Apache-2.0

#ifndef HANDBALL_QUANTIZATION_HPP
#define HANDBALL_QUANTIZATION_HPP

#include <Eigen/Dense>
#include <cstdint>

#include "handball/config.hpp"

namespace handball {

enum class QuantizerKind { Aqnm, Bussgang, Unquantized };

/// Linearization Q(x) ~ gain * x + d of the per-rail DAC quantizer, with
/// E[d d^H] = distortion_cov and E[Q(x) Q(x)^H] = output_cov.
struct QuantizationModel {
  QuantizerKind kind = QuantizerKind::Unquantized;
  Eigen::MatrixXcd gain;            // n_rf x n_rf, diagonal, real non-negative
  Eigen::MatrixXcd distortion_cov;  // n_rf x n_rf, Hermitian PSD
  Eigen::MatrixXcd output_cov;      // n_rf x n_rf, Hermitian PSD
  int bits = kInfiniteBits;
  double distortion_factor = 0.0;  // epsilon_b; zero unless kind == Aqnm
};

/// Distortion factor epsilon_b = (pi*sqrt(3)/2) * 2^(-2b) of a b-bit
/// uniform quantizer driven by a Gaussian input. Zero for infinite bits.
double distortion_factor(int bits);

/// Additive-quantization-noise model for b >= 1 bits:
/// gain = sqrt(1 - eps_b) * I, distortion_cov = (p_s*eps_b/n_users) *
/// diag(B B^H). Valid for any b; the distortion decouples across rails.
QuantizationModel aqnm_model(const Eigen::MatrixXcd& baseband, int bits, double p_s,
                             int n_users);

/// Bussgang decomposition of the one-bit quantizer for Gaussian input
/// x = B s with E[s s^H] = (p_s/n_users) I:
///   Sigma_x = (p_s/n_users) B B^H,   D = diag(Sigma_x)
///   gain    = sqrt(2/pi) D^(-1/2)
///   output_cov = (2/pi)[asin(D^-1/2 Re{Sigma_x} D^-1/2)
///                       + j asin(D^-1/2 Im{Sigma_x} D^-1/2)]   (element-wise)
///   distortion_cov = output_cov - gain Sigma_x gain
/// Throws SingularScalingError if any row of the baseband matrix is zero.
QuantizationModel bussgang_model(const Eigen::MatrixXcd& baseband, double p_s, int n_users);

/// Identity gain, zero distortion; the b = infinity model.
QuantizationModel unquantized_model(int n_rf);

/// The actual DAC nonlinearity, used as an empirical oracle for the models
/// above. bits == 1 maps each element to (sign(Re) + j sign(Im))/sqrt(2)
/// (unit output power per rail). For 1 < b < inf, a uniform midrise
/// quantizer with 2^b levels per rail clips at three per-rail standard
/// deviations of the expected input power and rescales the output to
/// preserve that power. Infinite bits is the identity.
Eigen::VectorXcd quantize(const Eigen::VectorXcd& signal, int bits, double expected_power = 1.0);

/// Monte-Carlo validation of the linearized models against quantize().
struct QuantizationCheckReport {
  int n_precoders = 0;
  int n_draws = 0;
  // One-bit checks: empirical covariance of Q(Bs) vs the arcsine law, and
  // cross-covariance of the Bussgang residual with the input. Failures
  // count entries farther than 3 Monte-Carlo standard errors from the
  // model (complex distance vs combined real/imag standard error).
  int covariance_failures = 0;
  int residual_failures = 0;
  double worst_covariance_se = 0.0;  // max |error| / SE observed
  double worst_residual_se = 0.0;
  // Few-bit sanity band: per-rail midrise distortion power within a factor
  // of two of eps_b times the rail power, for b in {2, 3, 4}.
  bool aqnm_band_ok = true;
  double worst_aqnm_ratio = 1.0;

  bool bussgang_ok() const { return covariance_failures == 0 && residual_failures == 0; }
  bool passed() const { return bussgang_ok() && aqnm_band_ok; }
};

QuantizationCheckReport run_quantization_check(std::uint64_t seed, int n_precoders = 50,
                                               int n_draws = 100000, int n_rf = 6,
                                               int n_streams = 3, double p_s = 1.0);

}  // namespace handball

#endif  // HANDBALL_QUANTIZATION_HPP
