// SPDX-License-Identifier: Apache-2.0

#ifndef HANDBALL_BEAMFORMING_HPP
#define HANDBALL_BEAMFORMING_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "handball/array_model.hpp"
#include "handball/config.hpp"
#include "handball/quantization.hpp"

namespace handball {

/// Hybrid transmitter: phase-shifter analog precoder (communication columns
/// followed by sensing columns), per-user analog combiners, and the digital
/// baseband precoder.
struct HybridBeamformer {
  Eigen::MatrixXcd analog_comm;   // n_tx x n_users
  Eigen::MatrixXcd analog_sense;  // n_tx x n_targets
  Eigen::MatrixXcd analog;        // n_tx x n_rf, [analog_comm analog_sense]
  Eigen::MatrixXcd combiners;     // n_rx x n_users, column u serves user u
  Eigen::MatrixXcd baseband;      // n_rf x n_users
  std::vector<int> selected_tx_indices;  // codebook columns of analog (users then targets)
  std::vector<int> selected_rx_indices;  // codebook columns of combiners
  std::vector<double> sensing_residual_norms;  // deflation trajectory, n_targets + 1 entries
};

/// Unconstrained (fully digital) transmit/receive pair of one user.
struct UnconstrainedPair {
  Eigen::VectorXcd precoder;  // unit norm
  Eigen::VectorXcd combiner;
};

/// Dominant right singular vector of the channel, phase-normalized so its
/// first nonzero entry is real positive. Throws DegenerateChannelError on a
/// zero channel.
Eigen::VectorXcd unconstrained_precoder(const UserChannel& channel);

/// MMSE-style single-stream combiner
///   v = (1/p_s) (f^H H^H H f + noise_var/p_s)^(-1) H f,
/// the column realization of the scalar-regularized matched filter.
Eigen::VectorXcd unconstrained_combiner(const UserChannel& channel,
                                        const Eigen::VectorXcd& precoder, double p_s,
                                        double noise_var);

UnconstrainedPair unconstrained_pair(const UserChannel& channel, double p_s, double noise_var);

/// Best transmit/receive codebook pair for one user: the argmax over (p, q)
/// of |psi_{p,q}^H g| with psi_{p,q} = conj(Psi_tx col p) kron (Psi_rx col q)
/// and g = conj(f) kron v. The joint correlation factorizes as
/// |tx_p^H f| * |rx_q^H v|, so the scan is O(K (n_tx + n_rx)) and never
/// materializes the K^2-column joint codebook. Ties resolve to the lowest
/// index, first in p then in q.
std::pair<int, int> select_codebook_pair(const Dictionary& dict, const Eigen::VectorXcd& f_opt,
                                         const Eigen::VectorXcd& v_opt);

/// Greedy analog design. Per user, selects the codebook pair maximizing the
/// correlation with the unconstrained SVD/MMSE pair; per target, selects the
/// transmit column most correlated with the sensing residual and deflates
/// the residual by projecting the selected direction out.
HybridBeamformer design_analog(const std::vector<UserChannel>& channels,
                               const SensingScene& scene, const Dictionary& dict,
                               const SystemConfig& cfg);

/// Per-user effective channel rows c_u^H H_u A stacked into U x n_rf.
Eigen::MatrixXcd effective_channel(const HybridBeamformer& bf,
                                   const std::vector<UserChannel>& channels);

/// Outcome of the baseband design: the quantization model that the final
/// precoder was normalized against plus power diagnostics.
struct BasebandDesign {
  QuantizationModel model;
  double comm_block_scale = 0.0;    // eta / ||pinv comm block||_F
  double sense_block_scale = 0.0;   // (1-eta) / ||pinv sense block||_F
  double power_scale = 1.0;         // final Frobenius rescale applied to the baseband
  double power_rf = 0.0;            // (p_s/U)||W B||_F^2 + tr(Sigma), RF-chain space
  double power_radiated = 0.0;      // same with the actual analog precoder applied
  double semi_unitary_deviation = 0.0;  // ||A^H A - I||_2
  bool derated = false;             // one-bit model power exceeded the budget
  bool rank_deficient = false;      // effective channel lost row rank
  bool duplicate_selection = false; // two users/targets picked the same column
};

/// Quantization-aware baseband design: zero-forcing pseudo-inverse of the
/// effective channel, eta block scaling between communication and sensing
/// rows, then power normalization against the quantization model for
/// cfg.bits. Fills bf.baseband and returns the model and diagnostics.
BasebandDesign design_baseband(HybridBeamformer& bf, const std::vector<UserChannel>& channels,
                               const SystemConfig& cfg);

/// SVD-based Moore-Penrose pseudo-inverse with the numerical rank.
struct PseudoInverse {
  Eigen::MatrixXcd matrix;
  int rank = 0;
};
PseudoInverse pseudo_inverse(const Eigen::MatrixXcd& m, double rcond = 1e-12);

}  // namespace handball

#endif  // HANDBALL_BEAMFORMING_HPP
