// SPDX-License-Identifier: Apache-2.0

#include "handball/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "handball/errors.hpp"
#include "handball/rng.hpp"

namespace handball {

namespace {

Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& m) {
  return 0.5 * (m + m.adjoint());
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Reconstruction levels and second moment E[q(X)^2] of the raw (unscaled)
/// midrise quantizer for X ~ N(0, sigma^2), clipping at 3 sigma.
double midrise_second_moment(int bits, double sigma) {
  const int levels = 1 << bits;
  const double clip = 3.0 * sigma;
  const double step = 2.0 * clip / levels;
  double m2 = 0.0;
  for (int i = 0; i < levels; ++i) {
    const double level = -clip + (i + 0.5) * step;
    const double lo = (i == 0) ? -std::numeric_limits<double>::infinity() : (-clip + i * step);
    const double hi = (i == levels - 1) ? std::numeric_limits<double>::infinity()
                                        : (-clip + (i + 1) * step);
    const double p = std_normal_cdf(hi / sigma) - std_normal_cdf(lo / sigma);
    m2 += level * level * p;
  }
  return m2;
}

}  // namespace

double distortion_factor(int bits) {
  if (is_infinite_bits(bits)) return 0.0;
  if (bits < 1) throw std::invalid_argument("distortion_factor: bits must be >= 1");
  return 0.5 * M_PI * std::sqrt(3.0) * std::exp2(-2.0 * bits);
}

QuantizationModel aqnm_model(const Eigen::MatrixXcd& baseband, int bits, double p_s,
                             int n_users) {
  const double eps = distortion_factor(bits);
  if (!(eps < 1.0)) throw std::logic_error("aqnm_model: distortion factor out of range");
  const auto n_rf = baseband.rows();

  QuantizationModel model;
  model.kind = QuantizerKind::Aqnm;
  model.bits = bits;
  model.distortion_factor = eps;
  model.gain = std::sqrt(1.0 - eps) *
               Eigen::MatrixXcd::Identity(n_rf, n_rf);
  const Eigen::VectorXd rail_power = baseband.rowwise().squaredNorm();
  model.distortion_cov =
      ((p_s * eps / n_users) * rail_power).asDiagonal().toDenseMatrix().cast<std::complex<double>>();
  const Eigen::MatrixXcd sigma_x = (p_s / n_users) * baseband * baseband.adjoint();
  model.output_cov = hermitian_part(model.gain * sigma_x * model.gain + model.distortion_cov);
  return model;
}

QuantizationModel bussgang_model(const Eigen::MatrixXcd& baseband, double p_s, int n_users) {
  const auto n_rf = baseband.rows();
  const Eigen::MatrixXcd sigma_x = hermitian_part((p_s / n_users) * baseband * baseband.adjoint());
  const Eigen::VectorXd rail_power = sigma_x.diagonal().real();
  for (Eigen::Index i = 0; i < n_rf; ++i)
    if (!(rail_power[i] > 0.0))
      throw SingularScalingError("bussgang_model: zero baseband row, one-bit rail has no signal");

  const Eigen::VectorXd d_inv_sqrt = rail_power.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd re_corr = d_inv_sqrt.asDiagonal() * sigma_x.real() * d_inv_sqrt.asDiagonal();
  Eigen::MatrixXd im_corr = d_inv_sqrt.asDiagonal() * sigma_x.imag() * d_inv_sqrt.asDiagonal();
  // Rounding can push normalized correlations a hair outside [-1, 1], and
  // asin() amplifies last-ulp errors near the rail self-correlation, which
  // is exactly 1 by construction.
  re_corr = re_corr.cwiseMax(-1.0).cwiseMin(1.0);
  im_corr = im_corr.cwiseMax(-1.0).cwiseMin(1.0);
  re_corr.diagonal().setOnes();
  im_corr.diagonal().setZero();

  QuantizationModel model;
  model.kind = QuantizerKind::Bussgang;
  model.bits = 1;
  model.gain = (std::sqrt(2.0 / M_PI) * d_inv_sqrt).asDiagonal().toDenseMatrix()
                   .cast<std::complex<double>>();
  const Eigen::MatrixXd re_out = (2.0 / M_PI) * re_corr.array().asin().matrix();
  const Eigen::MatrixXd im_out = (2.0 / M_PI) * im_corr.array().asin().matrix();
  model.output_cov = re_out.cast<std::complex<double>>() +
                     std::complex<double>(0.0, 1.0) * im_out.cast<std::complex<double>>();
  model.output_cov = hermitian_part(model.output_cov);
  model.output_cov.diagonal().setConstant(1.0);  // unit output power per rail
  model.distortion_cov = hermitian_part(model.output_cov - model.gain * sigma_x * model.gain);
  return model;
}

QuantizationModel unquantized_model(int n_rf) {
  QuantizationModel model;
  model.kind = QuantizerKind::Unquantized;
  model.bits = kInfiniteBits;
  model.gain = Eigen::MatrixXcd::Identity(n_rf, n_rf);
  model.distortion_cov = Eigen::MatrixXcd::Zero(n_rf, n_rf);
  model.output_cov = Eigen::MatrixXcd::Zero(n_rf, n_rf);
  return model;
}

Eigen::VectorXcd quantize(const Eigen::VectorXcd& signal, int bits, double expected_power) {
  if (is_infinite_bits(bits)) return signal;
  if (bits < 1) throw std::invalid_argument("quantize: bits must be >= 1");

  Eigen::VectorXcd out(signal.size());
  if (bits == 1) {
    const double amp = 1.0 / std::sqrt(2.0);
    for (Eigen::Index i = 0; i < signal.size(); ++i)
      out[i] = {std::real(signal[i]) >= 0.0 ? amp : -amp,
                std::imag(signal[i]) >= 0.0 ? amp : -amp};
    return out;
  }

  // Beyond 24 bits the midrise step at a 3-sigma clip falls under double
  // rounding noise; the quantizer is transparent at that point.
  if (bits > 24) return signal;
  const double sigma = std::sqrt(expected_power / 2.0);  // per-rail std dev
  const double clip = 3.0 * sigma;
  const int levels = 1 << bits;
  const double step = 2.0 * clip / levels;
  const double top = clip - 0.5 * step;
  const double scale = sigma / std::sqrt(midrise_second_moment(bits, sigma));
  auto rail = [&](double v) {
    const double y = (std::floor(v / step) + 0.5) * step;
    return scale * std::clamp(y, -top, top);
  };
  for (Eigen::Index i = 0; i < signal.size(); ++i)
    out[i] = {rail(std::real(signal[i])), rail(std::imag(signal[i]))};
  return out;
}

QuantizationCheckReport run_quantization_check(std::uint64_t seed, int n_precoders, int n_draws,
                                               int n_rf, int n_streams, double p_s) {
  QuantizationCheckReport report;
  report.n_precoders = n_precoders;
  report.n_draws = n_draws;
  const double stream_power = p_s / n_streams;

  for (int trial = 0; trial < n_precoders; ++trial) {
    Rng rng = Rng::stream(seed, 0xB0, trial);
    Eigen::MatrixXcd baseband(n_rf, n_streams);
    for (Eigen::Index r = 0; r < n_rf; ++r)
      for (Eigen::Index c = 0; c < n_streams; ++c) baseband(r, c) = rng.complex_gaussian();

    const QuantizationModel model = bussgang_model(baseband, p_s, n_streams);

    // Accumulate E[q q^H], E[d x^H], and the element-wise second moments
    // needed for Monte-Carlo standard errors.
    Eigen::MatrixXcd cov_sum = Eigen::MatrixXcd::Zero(n_rf, n_rf);
    Eigen::MatrixXd cov_sq_re = Eigen::MatrixXd::Zero(n_rf, n_rf);
    Eigen::MatrixXd cov_sq_im = Eigen::MatrixXd::Zero(n_rf, n_rf);
    Eigen::MatrixXcd cross_sum = Eigen::MatrixXcd::Zero(n_rf, n_rf);
    Eigen::MatrixXd cross_sq_re = Eigen::MatrixXd::Zero(n_rf, n_rf);
    Eigen::MatrixXd cross_sq_im = Eigen::MatrixXd::Zero(n_rf, n_rf);

    Eigen::VectorXcd s(n_streams);
    const double amp = std::sqrt(stream_power);
    for (int draw = 0; draw < n_draws; ++draw) {
      for (Eigen::Index k = 0; k < n_streams; ++k) s[k] = amp * rng.complex_gaussian();
      const Eigen::VectorXcd x = baseband * s;
      const Eigen::VectorXcd q = quantize(x, 1);
      const Eigen::VectorXcd d = q - model.gain * x;
      for (Eigen::Index i = 0; i < n_rf; ++i) {
        for (Eigen::Index j = 0; j < n_rf; ++j) {
          const std::complex<double> zc = q[i] * std::conj(q[j]);
          cov_sum(i, j) += zc;
          cov_sq_re(i, j) += zc.real() * zc.real();
          cov_sq_im(i, j) += zc.imag() * zc.imag();
          const std::complex<double> zr = d[i] * std::conj(x[j]);
          cross_sum(i, j) += zr;
          cross_sq_re(i, j) += zr.real() * zr.real();
          cross_sq_im(i, j) += zr.imag() * zr.imag();
        }
      }
    }

    auto entry_se = [&](const Eigen::MatrixXcd& sum, const Eigen::MatrixXd& sq_re,
                        const Eigen::MatrixXd& sq_im, Eigen::Index i, Eigen::Index j) {
      const double n = n_draws;
      const std::complex<double> mean = sum(i, j) / n;
      const double var_re = std::max(0.0, sq_re(i, j) / n - mean.real() * mean.real());
      const double var_im = std::max(0.0, sq_im(i, j) / n - mean.imag() * mean.imag());
      return std::sqrt((var_re + var_im) / n);
    };

    for (Eigen::Index i = 0; i < n_rf; ++i) {
      for (Eigen::Index j = 0; j < n_rf; ++j) {
        if (j > i) continue;  // Hermitian: test lower triangle plus diagonal
        const std::complex<double> emp = cov_sum(i, j) / static_cast<double>(n_draws);
        const double err = std::abs(emp - model.output_cov(i, j));
        if (i == j) {
          // One-bit outputs have unit modulus, so the diagonal is exact.
          if (err > 1e-12) ++report.covariance_failures;
          continue;
        }
        const double se = entry_se(cov_sum, cov_sq_re, cov_sq_im, i, j);
        report.worst_covariance_se = std::max(report.worst_covariance_se, err / se);
        if (err > 3.0 * se) ++report.covariance_failures;
      }
    }
    for (Eigen::Index i = 0; i < n_rf; ++i) {
      for (Eigen::Index j = 0; j < n_rf; ++j) {
        const std::complex<double> emp = cross_sum(i, j) / static_cast<double>(n_draws);
        const double se = entry_se(cross_sum, cross_sq_re, cross_sq_im, i, j);
        const double err = std::abs(emp);
        report.worst_residual_se = std::max(report.worst_residual_se, err / se);
        if (err > 3.0 * se) ++report.residual_failures;
      }
    }
  }

  // Few-bit sanity band for the midrise oracle against the AQNM factor.
  Rng rng = Rng::stream(seed, 0xA0, 0);
  const int band_draws = 200000;
  for (int bits : {2, 3, 4}) {
    const double eps = distortion_factor(bits);
    const double gain = std::sqrt(1.0 - eps);
    double dist_power = 0.0;
    Eigen::VectorXcd x(1);
    for (int draw = 0; draw < band_draws; ++draw) {
      x[0] = rng.complex_gaussian();
      const Eigen::VectorXcd q = quantize(x, bits, 1.0);
      dist_power += std::norm(q[0] - gain * x[0]);
    }
    dist_power /= band_draws;
    const double ratio = dist_power / eps;  // rail power is 1
    report.worst_aqnm_ratio =
        std::max({report.worst_aqnm_ratio, ratio, ratio > 0.0 ? 1.0 / ratio : 1e9});
    if (!(ratio > 0.5 && ratio < 2.0)) report.aqnm_band_ok = false;
  }
  return report;
}

}  // namespace handball
