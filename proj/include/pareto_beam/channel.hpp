// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "pareto_beam/types.hpp"

namespace pareto_beam {

/// A K-pair Gaussian MIMO interference channel instance.
///
/// Every transmitter has N antennas, receiver i has M_i antennas, and
/// channel(i, j) is the M_i x N matrix from transmitter j to receiver i.
/// Noise at every receiver is CN(0, I), so P_i is also the linear SNR.
class ChannelSet {
 public:
  /// Validates dimensions and powers; throws ConfigError on violation.
  ChannelSet(int tx_antennas, std::vector<int> rx_antennas, std::vector<double> powers,
             std::vector<std::vector<CMatrix>> channels);

  int users() const { return static_cast<int>(rx_antennas_.size()); }
  int tx_antennas() const { return tx_antennas_; }
  int rx_antennas(int i) const { return rx_antennas_.at(i); }
  const std::vector<int>& rx_antennas() const { return rx_antennas_; }
  int total_rx_antennas() const;

  double power(int i) const { return powers_.at(i); }
  const std::vector<double>& powers() const { return powers_; }

  /// Channel from transmitter `tx` to receiver `rx`.
  const CMatrix& channel(int rx, int tx) const { return channels_.at(rx).at(tx); }

  /// Same channel realization, different power budgets.
  ChannelSet with_powers(std::vector<double> powers) const;

 private:
  int tx_antennas_;
  std::vector<int> rx_antennas_;
  std::vector<double> powers_;
  std::vector<std::vector<CMatrix>> channels_;
};

/// Throws ConfigError unless M_i >= 1 and N >= max M_i.
void validate_dimensions(int tx_antennas, const std::vector<int>& rx_antennas);

/// Transmit covariance of one transmitter.
struct Covariance {
  CMatrix matrix;

  /// Throws ContractViolation if the matrix is not Hermitian, not PSD or
  /// over the power budget (tolerances 1e-10, 1e-10 tr(Q), 1e-8).
  void validate(double budget) const;
};

/// Parallel and vertical spaces of a fat channel matrix.
struct SvdSpaces {
  CMatrix v_parallel;       // N x M, spans the row space of H
  CMatrix v_perp;           // N x (N - M), spans the null space of H
  RVector singular_values;  // M values, descending
};

/// Orthonormal basis of the column space of [H_1i^H, ..., H_Ki^H].
struct ReducedBasis {
  CMatrix upsilon;  // N x m with orthonormal columns
  CMatrix r;        // m x (sum M_j), so that upsilon * r == stacked channel
  int rank = 0;     // revealed numerical rank m
};

/// Per-pair rates in nats per channel use.
struct RateTuple {
  std::vector<double> rates;
  double utility = std::numeric_limits<double>::quiet_NaN();

  double sum() const;
};

/// i.i.d. CN(0, 1) channel entries, deterministic in `seed`.
ChannelSet generate_channels(int tx_antennas, const std::vector<int>& rx_antennas,
                             const std::vector<double>& powers, std::uint64_t seed);

SvdSpaces svd_spaces(const CMatrix& h);

/// Number of singular values above 1e-10 * sigma_1 * max(rows, cols).
int numerical_rank(const RVector& singular_values, Eigen::Index rows, Eigen::Index cols);

/// [H_1i^H, ..., H_Ki^H], the N x (sum M_j) matrix of all channels leaving
/// transmitter i.
CMatrix stacked_channels(const ChannelSet& ch, int tx);

ReducedBasis reduced_basis(const ChannelSet& ch, int tx);

/// Q = Upsilon U diag(lambda) U^H Upsilon^H. Throws ContractViolation when
/// U is not orthonormal (1e-8), shapes disagree, or lambda has a negative
/// entry.
Covariance covariance_from_params(const ReducedBasis& rb, const CMatrix& u, const RVector& lambda);

/// log det of a Hermitian positive definite matrix via Cholesky. Throws
/// InternalError if the factorization fails.
double log_det_hpd(const CMatrix& a);

/// R_i = log|T_i| - log|T_i - H_ii Q_i H_ii^H| with
/// T_i = I + sum_j H_ij Q_j H_ij^H.
RateTuple rates(const ChannelSet& ch, const std::vector<Covariance>& q);

/// Gamma = Upsilon U(:, 1:d) sqrt(diag(lambda_1..d)) after sorting lambda in
/// descending order, with d = #{lambda_k > rank_threshold * budget}.
/// Throws DegenerateSolution when d == 0.
CMatrix beamformer_matrix(const ReducedBasis& rb, const CMatrix& u, const RVector& lambda,
                          double rank_threshold, double budget);

/// Number of streams the beamformer_matrix rule would keep.
int stream_count(const RVector& lambda, double rank_threshold, double budget);

}  // namespace pareto_beam
