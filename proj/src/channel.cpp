// SPDX-License-Identifier: Apache-2.0
#include "pareto_beam/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace pareto_beam {

void validate_dimensions(int tx_antennas, const std::vector<int>& rx_antennas) {
  if (rx_antennas.empty()) throw ConfigError("at least one transmitter-receiver pair is required");
  for (int m : rx_antennas) {
    if (m < 1) throw ConfigError("every receiver needs at least one antenna");
    if (tx_antennas < m) {
      throw ConfigError("N = " + std::to_string(tx_antennas) +
                        " transmit antennas is smaller than M = " + std::to_string(m));
    }
  }
}

ChannelSet::ChannelSet(int tx_antennas, std::vector<int> rx_antennas, std::vector<double> powers,
                       std::vector<std::vector<CMatrix>> channels)
    : tx_antennas_(tx_antennas),
      rx_antennas_(std::move(rx_antennas)),
      powers_(std::move(powers)),
      channels_(std::move(channels)) {
  validate_dimensions(tx_antennas_, rx_antennas_);
  const auto k = rx_antennas_.size();
  if (powers_.size() != k) throw ConfigError("one power budget per transmitter is required");
  for (double p : powers_) {
    if (!(p > 0.0) || !std::isfinite(p)) throw ConfigError("power budgets must be positive and finite");
  }
  if (channels_.size() != k) throw ConfigError("channel grid must be K x K");
  for (std::size_t i = 0; i < k; ++i) {
    if (channels_[i].size() != k) throw ConfigError("channel grid must be K x K");
    for (std::size_t j = 0; j < k; ++j) {
      const CMatrix& h = channels_[i][j];
      if (h.rows() != rx_antennas_[i] || h.cols() != tx_antennas_) {
        throw ConfigError("channel (" + std::to_string(i) + "," + std::to_string(j) +
                          ") must be M_i x N");
      }
    }
  }
}

int ChannelSet::total_rx_antennas() const {
  return std::accumulate(rx_antennas_.begin(), rx_antennas_.end(), 0);
}

ChannelSet ChannelSet::with_powers(std::vector<double> powers) const {
  return ChannelSet(tx_antennas_, rx_antennas_, std::move(powers), channels_);
}

void Covariance::validate(double budget) const {
  if (matrix.rows() != matrix.cols()) throw ContractViolation("covariance must be square");
  if (matrix.size() == 0) return;
  const double asym = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) throw ContractViolation("covariance is not Hermitian");
  const double trace = matrix.trace().real();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(matrix, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10 * std::max(trace, 1.0)) {
    throw ContractViolation("covariance is not positive semi-definite");
  }
  if (trace > budget + 1e-8) throw ContractViolation("covariance exceeds its power budget");
}

double RateTuple::sum() const { return std::accumulate(rates.begin(), rates.end(), 0.0); }

ChannelSet generate_channels(int tx_antennas, const std::vector<int>& rx_antennas,
                             const std::vector<double>& powers, std::uint64_t seed) {
  validate_dimensions(tx_antennas, rx_antennas);
  const auto k = rx_antennas.size();
  std::mt19937_64 rng(seed);
  // Real and imaginary parts each carry variance 1/2.
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));

  std::vector<std::vector<CMatrix>> h(k, std::vector<CMatrix>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      CMatrix m(rx_antennas[i], tx_antennas);
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
          const double re = gauss(rng);
          const double im = gauss(rng);
          m(r, c) = Complex(re, im);
        }
      }
      h[i][j] = std::move(m);
    }
  }
  return ChannelSet(tx_antennas, rx_antennas, powers, std::move(h));
}

SvdSpaces svd_spaces(const CMatrix& h) {
  const Eigen::Index m = h.rows();
  const Eigen::Index n = h.cols();
  if (n < m) throw ContractViolation("svd_spaces expects a fat channel matrix (N >= M)");
  Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeFullV);
  SvdSpaces out;
  out.v_parallel = svd.matrixV().leftCols(m);
  out.v_perp = svd.matrixV().rightCols(n - m);
  out.singular_values = svd.singularValues();
  return out;
}

int numerical_rank(const RVector& singular_values, Eigen::Index rows, Eigen::Index cols) {
  if (singular_values.size() == 0) return 0;
  const double sigma1 = singular_values.maxCoeff();
  if (sigma1 <= 0.0) return 0;
  const double tol = 1e-10 * sigma1 * static_cast<double>(std::max(rows, cols));
  return static_cast<int>((singular_values.array() > tol).count());
}

CMatrix stacked_channels(const ChannelSet& ch, int tx) {
  CMatrix stacked(ch.tx_antennas(), ch.total_rx_antennas());
  Eigen::Index col = 0;
  for (int j = 0; j < ch.users(); ++j) {
    const CMatrix& h = ch.channel(j, tx);
    stacked.middleCols(col, h.rows()) = h.adjoint();
    col += h.rows();
  }
  return stacked;
}

ReducedBasis reduced_basis(const ChannelSet& ch, int tx) {
  const CMatrix a = stacked_channels(ch, tx);
  const Eigen::Index n = a.rows();
  const Eigen::Index s = a.cols();
  Eigen::JacobiSVD<CMatrix> svd(a);
  const int rank = numerical_rank(svd.singularValues(), n, s);

  ReducedBasis rb;
  if (rank == s) {
    // Full column rank: plain skinny QR keeps the channel ordering of the
    // stacked matrix in the leading columns of Upsilon.
    Eigen::HouseholderQR<CMatrix> qr(a);
    rb.upsilon = qr.householderQ() * CMatrix::Identity(n, s);
    rb.r = qr.matrixQR().topRows(s).triangularView<Eigen::Upper>();
    rb.rank = rank;
    return rb;
  }

  // Rank deficient: column pivoting reveals the rank; R is trapezoidal up to
  // the column permutation.
  Eigen::ColPivHouseholderQR<CMatrix> qr(a);
  const int m = std::max(rank, 1);
  const CMatrix q = qr.householderQ() * CMatrix::Identity(n, m);
  const CMatrix r_piv = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  rb.upsilon = q;
  rb.r = r_piv * qr.colsPermutation().transpose();
  rb.rank = m;
  return rb;
}

Covariance covariance_from_params(const ReducedBasis& rb, const CMatrix& u, const RVector& lambda) {
  if (u.rows() != rb.upsilon.cols()) throw ContractViolation("U row count must match the basis");
  if (u.cols() != lambda.size()) throw ContractViolation("U column count must match lambda");
  if (orthonormality_error(u) > 1e-8) throw ContractViolation("U does not have orthonormal columns");
  if (lambda.size() > 0 && lambda.minCoeff() < 0.0) throw ContractViolation("lambda must be non-negative");
  const CMatrix w = rb.upsilon * u;
  CMatrix q = w * lambda.cast<Complex>().asDiagonal() * w.adjoint();
  return Covariance{0.5 * (q + q.adjoint())};
}

double log_det_hpd(const CMatrix& a) {
  Eigen::LLT<CMatrix> llt(a);
  if (llt.info() != Eigen::Success) throw InternalError("matrix is not positive definite");
  return 2.0 * llt.matrixLLT().diagonal().real().array().log().sum();
}

RateTuple rates(const ChannelSet& ch, const std::vector<Covariance>& q) {
  const int k = ch.users();
  if (static_cast<int>(q.size()) != k) throw ContractViolation("one covariance per transmitter is required");
  for (int j = 0; j < k; ++j) {
    if (q[j].matrix.rows() != ch.tx_antennas() || q[j].matrix.cols() != ch.tx_antennas()) {
      throw ContractViolation("covariance must be N x N");
    }
  }
  RateTuple out;
  out.rates.resize(k);
  for (int i = 0; i < k; ++i) {
    const int mi = ch.rx_antennas(i);
    CMatrix total = CMatrix::Identity(mi, mi);
    CMatrix own;
    for (int j = 0; j < k; ++j) {
      const CMatrix& h = ch.channel(i, j);
      CMatrix term = h * q[j].matrix * h.adjoint();
      if (j == i) own = term;
      total += term;
    }
    total = 0.5 * (total + total.adjoint());
    CMatrix interference = total - own;
    interference = 0.5 * (interference + interference.adjoint());
    out.rates[i] = std::max(0.0, log_det_hpd(total) - log_det_hpd(interference));
  }
  return out;
}

int stream_count(const RVector& lambda, double rank_threshold, double budget) {
  return static_cast<int>((lambda.array() > rank_threshold * budget).count());
}

CMatrix beamformer_matrix(const ReducedBasis& rb, const CMatrix& u, const RVector& lambda,
                          double rank_threshold, double budget) {
  if (u.rows() != rb.upsilon.cols() || u.cols() != lambda.size()) {
    throw ContractViolation("beamformer_matrix: shape mismatch");
  }
  const int d = stream_count(lambda, rank_threshold, budget);
  if (d == 0) throw DegenerateSolution("all eigenvalues are below the stream threshold");

  std::vector<Eigen::Index> order(lambda.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return lambda(a) > lambda(b); });

  CMatrix cols(u.rows(), d);
  for (int s = 0; s < d; ++s) cols.col(s) = u.col(order[s]) * std::sqrt(lambda(order[s]));
  return rb.upsilon * cols;
}

}  // namespace pareto_beam
