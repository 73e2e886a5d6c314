// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "handball/errors.hpp"
#include "handball/quantization.hpp"
#include "handball/rng.hpp"

using namespace handball;
using cxd = std::complex<double>;

namespace {

Eigen::MatrixXcd random_baseband(int rows, int cols, Rng& rng) {
  Eigen::MatrixXcd b(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) b(r, c) = rng.complex_gaussian();
  return b;
}

double min_eigenvalue(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (m + m.adjoint()),
                                                      Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("distortion factor closed form and frozen values") {
  const double base = 0.5 * M_PI * std::sqrt(3.0);
  CHECK(distortion_factor(1) == doctest::Approx(base / 4.0).epsilon(1e-14));
  CHECK(distortion_factor(1) == doctest::Approx(0.6801747615878316).epsilon(1e-12));
  CHECK(distortion_factor(4) == doctest::Approx(0.010627730649809869).epsilon(1e-9));
  CHECK(distortion_factor(20) < 1e-11);
  CHECK(distortion_factor(kInfiniteBits) == 0.0);
  CHECK_THROWS_AS(distortion_factor(0), std::invalid_argument);
  for (int b = 1; b < 12; ++b) CHECK(distortion_factor(b + 1) < distortion_factor(b));
}

TEST_CASE("aqnm model on unit-norm rows is a scaled identity") {
  Rng rng(3);
  Eigen::MatrixXcd b = random_baseband(4, 2, rng);
  for (int r = 0; r < 4; ++r) b.row(r) /= b.row(r).norm();
  const double p_s = 2.0;
  const int n_users = 2;
  const QuantizationModel m = aqnm_model(b, 2, p_s, n_users);
  const double eps = distortion_factor(2);
  CHECK((m.gain - std::sqrt(1.0 - eps) * Eigen::MatrixXcd::Identity(4, 4)).norm() < 1e-12);
  CHECK((m.distortion_cov - (p_s * eps / n_users) * Eigen::MatrixXcd::Identity(4, 4)).norm() <
        1e-12);
}

TEST_CASE("aqnm model of a zero precoder has zero distortion") {
  const Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(3, 2);
  const QuantizationModel m = aqnm_model(b, 3, 1.0, 2);
  CHECK(m.distortion_cov.norm() == 0.0);
  CHECK(m.gain(0, 0).real() == doctest::Approx(std::sqrt(1.0 - distortion_factor(3))));
}

TEST_CASE("aqnm distortion trace equals the scaled squared Frobenius norm") {
  Rng rng(21);
  const Eigen::MatrixXcd b = random_baseband(6, 3, rng);
  const double p_s = 1.7;
  const QuantizationModel m = aqnm_model(b, 3, p_s, 3);
  const double expected = (p_s * distortion_factor(3) / 3.0) * b.squaredNorm();
  CHECK(m.distortion_cov.real().trace() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("bussgang model with uncorrelated equal-power rails") {
  // Sigma_x proportional to the identity: output covariance is the
  // identity and the distortion is (1 - 2/pi) I.
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(3, 3);
  b(0, 0) = cxd(2.0, 0.0);
  b(1, 1) = cxd(0.0, 2.0);
  b(2, 2) = cxd(-2.0, 0.0);
  const QuantizationModel m = bussgang_model(b, 1.0, 3);
  CHECK((m.output_cov - Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-12);
  const double resid = 1.0 - 2.0 / M_PI;
  CHECK((m.distortion_cov - resid * Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("bussgang output covariance has a unit diagonal for any precoder") {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXcd b = random_baseband(5, 3, rng);
    const QuantizationModel m = bussgang_model(b, 0.7, 3);
    for (int i = 0; i < 5; ++i) CHECK(std::abs(m.output_cov(i, i) - 1.0) < 1e-12);
  }
}

TEST_CASE("bussgang model on fully correlated rails") {
  // Two rails fed the identical signal: outputs are identical, so the
  // distortion is fully correlated with per-entry power 1 - 2/pi. The
  // Monte-Carlo quantizer covariance is the independent oracle.
  Eigen::MatrixXcd b(2, 1);
  b << cxd(1.0, 0.0), cxd(1.0, 0.0);
  const QuantizationModel m = bussgang_model(b, 1.0, 1);
  const Eigen::MatrixXcd ones = Eigen::MatrixXcd::Ones(2, 2);
  CHECK((m.output_cov - ones).norm() < 1e-6);
  const double resid = 1.0 - 2.0 / M_PI;
  CHECK((m.distortion_cov - resid * ones).norm() < 1e-6);

  Rng rng(77);
  Eigen::MatrixXcd cov_mc = Eigen::MatrixXcd::Zero(2, 2);
  Eigen::MatrixXcd dist_mc = Eigen::MatrixXcd::Zero(2, 2);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    Eigen::VectorXcd s(1);
    s[0] = rng.complex_gaussian();
    const Eigen::VectorXcd x = b * s;
    const Eigen::VectorXcd q = quantize(x, 1);
    const Eigen::VectorXcd d = q - m.gain * x;
    cov_mc += q * q.adjoint();
    dist_mc += d * d.adjoint();
  }
  cov_mc /= draws;
  dist_mc /= draws;
  CHECK((cov_mc - m.output_cov).cwiseAbs().maxCoeff() < 1e-2);
  CHECK((dist_mc - m.distortion_cov).cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("bussgang model rejects a zero rail") {
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(3, 2);
  b(0, 0) = 1.0;
  b(2, 1) = 1.0;
  CHECK_THROWS_AS(bussgang_model(b, 1.0, 2), SingularScalingError);
}

TEST_CASE("distortion covariances are Hermitian positive semidefinite") {
  Rng rng(13);
  for (int t = 0; t < 50; ++t) {
    const Eigen::MatrixXcd b = random_baseband(6, 3, rng);
    for (int bits : {1, 2, 3, 4, 8}) {
      const QuantizationModel m = bits == 1 ? bussgang_model(b, 1.0, 3)
                                            : aqnm_model(b, bits, 1.0, 3);
      CHECK((m.distortion_cov - m.distortion_cov.adjoint()).norm() < 1e-10);
      CHECK(min_eigenvalue(m.distortion_cov) > -1e-10);
      // gain is diagonal with real non-negative entries
      Eigen::MatrixXcd off = m.gain;
      off.diagonal().setZero();
      CHECK(off.norm() == 0.0);
      for (int i = 0; i < 6; ++i) {
        CHECK(m.gain(i, i).imag() == 0.0);
        CHECK(m.gain(i, i).real() > 0.0);
      }
    }
  }
}

TEST_CASE("aqnm distortion trace decreases strictly with the bit depth") {
  Rng rng(19);
  const Eigen::MatrixXcd b = random_baseband(6, 3, rng);
  double last = std::numeric_limits<double>::infinity();
  for (int bits = 1; bits <= 8; ++bits) {
    const double tr = aqnm_model(b, bits, 1.0, 3).distortion_cov.real().trace();
    CHECK(tr < last);
    last = tr;
  }
}

TEST_CASE("one-bit quantizer extracts signs at fixed amplitude") {
  Eigen::VectorXcd x(3);
  x << cxd(3.0, -4.0), cxd(-0.5, 0.2), cxd(0.0, 0.0);
  const Eigen::VectorXcd q = quantize(x, 1);
  const double a = 1.0 / std::sqrt(2.0);
  CHECK(q[0] == cxd(a, -a));
  CHECK(q[1] == cxd(-a, a));
  CHECK(q[2] == cxd(a, a));  // zero rails quantize to the positive level
}

TEST_CASE("infinite resolution is the identity") {
  Rng rng(2);
  Eigen::VectorXcd x(5);
  for (int i = 0; i < 5; ++i) x[i] = rng.complex_gaussian();
  CHECK(quantize(x, kInfiniteBits) == x);
}

TEST_CASE("one-bit quantizer matches the Bussgang gain on Gaussian input") {
  Rng rng(23);
  cxd corr{};
  double power = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    Eigen::VectorXcd x(1);
    x[0] = rng.complex_gaussian();
    const Eigen::VectorXcd q = quantize(x, 1);
    corr += q[0] * std::conj(x[0]);
    power += std::norm(x[0]);
  }
  corr /= static_cast<double>(draws);
  power /= draws;
  CHECK(std::abs(corr - std::sqrt(2.0 / M_PI) * power) < 1e-2);
}

TEST_CASE("midrise quantizer preserves input power and lands in the distortion band") {
  Rng rng(29);
  for (int bits : {2, 3, 4}) {
    double out_power = 0.0, dist = 0.0;
    const double eps = distortion_factor(bits);
    const double gain = std::sqrt(1.0 - eps);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
      Eigen::VectorXcd x(1);
      x[0] = rng.complex_gaussian();
      const Eigen::VectorXcd q = quantize(x, bits, 1.0);
      out_power += std::norm(q[0]);
      dist += std::norm(q[0] - gain * x[0]);
    }
    out_power /= draws;
    dist /= draws;
    CHECK(out_power == doctest::Approx(1.0).epsilon(0.02));
    const double ratio = dist / eps;
    CHECK(ratio > 0.5);
    CHECK(ratio < 2.0);
  }
}

TEST_CASE("monte-carlo validation harness passes at reduced size") {
  const QuantizationCheckReport report = run_quantization_check(1, 5, 20000, 4, 2);
  CHECK(report.bussgang_ok());
  CHECK(report.aqnm_band_ok);
  CHECK(report.worst_covariance_se < 3.0);
}
