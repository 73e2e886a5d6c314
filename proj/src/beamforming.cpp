// SPDX-License-Identifier: Apache-2.0

#include "handball/beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "handball/errors.hpp"

namespace handball {

namespace {

/// Rotates v so its first nonzero entry is real positive; pins down the
/// global phase ambiguity of singular vectors.
void normalize_phase(Eigen::VectorXcd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]);
    if (mag > 1e-12) {
      v *= std::conj(v[i]) / mag;
      return;
    }
  }
}

/// Index of the largest entry; the first one wins on ties.
int argmax_lowest(const Eigen::VectorXd& values) {
  int best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = static_cast<int>(i);
  return best;
}

bool has_duplicates(const std::vector<int>& indices) {
  std::unordered_set<int> seen(indices.begin(), indices.end());
  return seen.size() != indices.size();
}

}  // namespace

PseudoInverse pseudo_inverse(const Eigen::MatrixXcd& m, double rcond) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? rcond * sv[0] : 0.0;
  PseudoInverse out;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff && sv[i] > 0.0) {
      inv[i] = 1.0 / sv[i];
      ++out.rank;
    }
  }
  out.matrix = svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
  return out;
}

Eigen::VectorXcd unconstrained_precoder(const UserChannel& channel) {
  if (!(channel.matrix.norm() > 0.0))
    throw DegenerateChannelError("unconstrained_precoder: zero channel matrix");
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(channel.matrix, Eigen::ComputeThinV);
  Eigen::VectorXcd f = svd.matrixV().col(0);
  normalize_phase(f);
  return f;
}

Eigen::VectorXcd unconstrained_combiner(const UserChannel& channel,
                                        const Eigen::VectorXcd& precoder, double p_s,
                                        double noise_var) {
  const Eigen::VectorXcd hf = channel.matrix * precoder;
  const double denom = p_s * (hf.squaredNorm() + noise_var / p_s);
  return hf / denom;
}

UnconstrainedPair unconstrained_pair(const UserChannel& channel, double p_s, double noise_var) {
  UnconstrainedPair pair;
  pair.precoder = unconstrained_precoder(channel);
  pair.combiner = unconstrained_combiner(channel, pair.precoder, p_s, noise_var);
  return pair;
}

std::pair<int, int> select_codebook_pair(const Dictionary& dict, const Eigen::VectorXcd& f_opt,
                                         const Eigen::VectorXcd& v_opt) {
  const Eigen::VectorXd tx_corr = (dict.tx_codebook.adjoint() * f_opt).cwiseAbs();
  const Eigen::VectorXd rx_corr = (dict.rx_codebook.adjoint() * v_opt).cwiseAbs();
  return {argmax_lowest(tx_corr), argmax_lowest(rx_corr)};
}

HybridBeamformer design_analog(const std::vector<UserChannel>& channels,
                               const SensingScene& scene, const Dictionary& dict,
                               const SystemConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(channels.size()) != cfg.n_users)
    throw std::invalid_argument("design_analog: expected n_users channels");
  if (scene.snapshot.size() != cfg.n_tx)
    throw std::invalid_argument("design_analog: snapshot length must equal n_tx");
  if (dict.tx_codebook.cols() < cfg.n_rf)
    throw std::invalid_argument("design_analog: dictionary smaller than n_rf");

  HybridBeamformer bf;
  bf.analog_comm.resize(cfg.n_tx, cfg.n_users);
  bf.analog_sense.resize(cfg.n_tx, cfg.n_targets);
  bf.combiners.resize(cfg.n_rx, cfg.n_users);

  for (int u = 0; u < cfg.n_users; ++u) {
    const UnconstrainedPair pair = unconstrained_pair(channels[u], cfg.p_s, cfg.noise_var);
    const auto [p, q] = select_codebook_pair(dict, pair.precoder, pair.combiner);
    bf.analog_comm.col(u) = dict.tx_codebook.col(p);
    bf.combiners.col(u) = dict.rx_codebook.col(q);
    bf.selected_tx_indices.push_back(p);
    bf.selected_rx_indices.push_back(q);
  }

  Eigen::VectorXcd residual = scene.snapshot;
  bf.sensing_residual_norms.push_back(residual.norm());
  for (int t = 0; t < cfg.n_targets; ++t) {
    const Eigen::VectorXd corr = (dict.tx_codebook.adjoint() * residual).cwiseAbs();
    const int z = argmax_lowest(corr);
    const Eigen::VectorXcd& psi = dict.tx_codebook.col(z);
    bf.analog_sense.col(t) = psi;
    bf.selected_tx_indices.push_back(z);
    residual -= psi * (psi.dot(residual) / psi.squaredNorm());
    bf.sensing_residual_norms.push_back(residual.norm());
  }

  bf.analog.resize(cfg.n_tx, cfg.n_rf);
  bf.analog << bf.analog_comm, bf.analog_sense;
  return bf;
}

Eigen::MatrixXcd effective_channel(const HybridBeamformer& bf,
                                   const std::vector<UserChannel>& channels) {
  const auto n_users = static_cast<Eigen::Index>(channels.size());
  Eigen::MatrixXcd heff(n_users, bf.analog.cols());
  for (Eigen::Index u = 0; u < n_users; ++u)
    heff.row(u) = bf.combiners.col(u).adjoint() * channels[u].matrix * bf.analog;
  return heff;
}

BasebandDesign design_baseband(HybridBeamformer& bf, const std::vector<UserChannel>& channels,
                               const SystemConfig& cfg) {
  cfg.validate();
  const int n_users = cfg.n_users;
  const int n_targets = cfg.n_targets;
  const int n_rf = cfg.n_rf;

  const Eigen::MatrixXcd heff = effective_channel(bf, channels);
  const PseudoInverse pinv = pseudo_inverse(heff);
  BasebandDesign out;
  out.rank_deficient =
      pinv.rank < static_cast<int>(std::min(heff.rows(), heff.cols()));
  out.duplicate_selection =
      has_duplicates(bf.selected_tx_indices) || has_duplicates(bf.selected_rx_indices);

  // eta split: communication rows to norm eta, sensing rows to norm 1-eta.
  Eigen::MatrixXcd b_hat = pinv.matrix;
  const double comm_norm = b_hat.topRows(n_users).norm();
  const double sense_norm = b_hat.bottomRows(n_targets).norm();
  if (cfg.eta > 0.0) {
    if (!(comm_norm > 0.0))
      throw SingularScalingError("design_baseband: zero communication block in the pseudo-inverse");
    out.comm_block_scale = cfg.eta / comm_norm;
    b_hat.topRows(n_users) *= out.comm_block_scale;
  } else {
    b_hat.topRows(n_users).setZero();
  }
  if (cfg.eta < 1.0) {
    if (!(sense_norm > 0.0))
      throw SingularScalingError("design_baseband: zero sensing block in the pseudo-inverse");
    out.sense_block_scale = (1.0 - cfg.eta) / sense_norm;
    b_hat.bottomRows(n_targets) *= out.sense_block_scale;
  } else {
    b_hat.bottomRows(n_targets).setZero();
  }
  if (!(b_hat.squaredNorm() > 0.0))
    throw SingularScalingError("design_baseband: baseband precoder is identically zero");

  if (is_infinite_bits(cfg.bits)) {
    out.model = unquantized_model(n_rf);
    const double signal = (cfg.p_s / n_users) * b_hat.squaredNorm();
    out.power_scale = std::sqrt(cfg.p_max / signal);
    bf.baseband = out.power_scale * b_hat;
  } else if (cfg.bits > 1) {
    // AQNM: the gain is scale-free and the distortion covariance scales
    // quadratically with the precoder, so the power constraint solves in
    // closed form for the Frobenius rescale.
    const QuantizationModel at_hat = aqnm_model(b_hat, cfg.bits, cfg.p_s, n_users);
    const double signal = (cfg.p_s / n_users) * (at_hat.gain * b_hat).squaredNorm();
    const double distortion = at_hat.distortion_cov.real().trace();
    out.power_scale = std::sqrt(cfg.p_max / (signal + distortion));
    bf.baseband = out.power_scale * b_hat;
    out.model = aqnm_model(bf.baseband, cfg.bits, cfg.p_s, n_users);
  } else {
    // One-bit. Rails zeroed by the eta split carry no signal and are
    // excluded from the Bussgang model; they keep zero gain and zero
    // distortion in the embedded matrices.
    std::vector<int> active;
    for (int r = 0; r < n_rf; ++r)
      if (b_hat.row(r).squaredNorm() > 0.0) active.push_back(r);
    Eigen::MatrixXcd b_active(active.size(), n_users);
    for (std::size_t i = 0; i < active.size(); ++i) b_active.row(i) = b_hat.row(active[i]);
    const QuantizationModel sub = bussgang_model(b_active, cfg.p_s, n_users);

    QuantizationModel model;
    model.kind = QuantizerKind::Bussgang;
    model.bits = 1;
    model.gain = Eigen::MatrixXcd::Zero(n_rf, n_rf);
    model.distortion_cov = Eigen::MatrixXcd::Zero(n_rf, n_rf);
    model.output_cov = Eigen::MatrixXcd::Zero(n_rf, n_rf);
    for (std::size_t i = 0; i < active.size(); ++i) {
      model.gain(active[i], active[i]) = sub.gain(i, i);
      for (std::size_t j = 0; j < active.size(); ++j) {
        model.distortion_cov(active[i], active[j]) = sub.distortion_cov(i, j);
        model.output_cov(active[i], active[j]) = sub.output_cov(i, j);
      }
    }

    // Both the effective gain W B and the distortion covariance are
    // invariant to rescaling B, so the model is evaluated once at the
    // eta-normalized precoder.
    const double signal = (cfg.p_s / n_users) * (model.gain * b_hat).squaredNorm();
    const double distortion = model.distortion_cov.real().trace();
    if (cfg.p_max > distortion) {
      out.power_scale = std::sqrt((cfg.p_max - distortion) / signal);
      bf.baseband = out.power_scale * b_hat;
    } else {
      // The fixed per-rail output power of the one-bit model already
      // exceeds the budget, so no rescale of B can satisfy it. Derate the
      // DAC output swing instead: scale the whole quantizer output (gain
      // and distortion alike) down to the budget.
      out.derated = true;
      const double g2 = cfg.p_max / (signal + distortion);
      model.gain *= std::sqrt(g2);
      model.distortion_cov *= g2;
      model.output_cov *= g2;
      out.power_scale = 1.0;
      bf.baseband = b_hat;
    }
    out.model = model;
  }

  out.power_rf = (cfg.p_s / n_users) * (out.model.gain * bf.baseband).squaredNorm() +
                 out.model.distortion_cov.real().trace();
  const Eigen::MatrixXcd awb = bf.analog * out.model.gain * bf.baseband;
  out.power_radiated =
      (cfg.p_s / n_users) * awb.squaredNorm() +
      (bf.analog * out.model.distortion_cov * bf.analog.adjoint()).real().trace();
  const Eigen::MatrixXcd gram_err =
      bf.analog.adjoint() * bf.analog - Eigen::MatrixXcd::Identity(n_rf, n_rf);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (gram_err + gram_err.adjoint()),
                                                      Eigen::EigenvaluesOnly);
  out.semi_unitary_deviation = eig.eigenvalues().cwiseAbs().maxCoeff();
  return out;
}

}  // namespace handball
