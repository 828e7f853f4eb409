// SPDX-License-Identifier: Apache-2.0
#include "pareto_beam/baselines.hpp"

#include <algorithm>
#include <numeric>

namespace pareto_beam {

RVector water_filling(const RVector& gains, double budget) {
  const Eigen::Index n = gains.size();
  RVector power = RVector::Zero(n);
  std::vector<Eigen::Index> order;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (gains(k) > 0.0) order.push_back(k);
  }
  if (order.empty() || !(budget > 0.0)) return power;
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return gains(a) > gains(b); });

  // Largest active set whose water level clears the weakest active mode.
  double level = 0.0;
  std::size_t active = order.size();
  for (; active >= 1; --active) {
    double inv_sum = 0.0;
    for (std::size_t k = 0; k < active; ++k) inv_sum += 1.0 / gains(order[k]);
    level = (budget + inv_sum) / static_cast<double>(active);
    if (level > 1.0 / gains(order[active - 1])) break;
  }
  for (std::size_t k = 0; k < active; ++k) power(order[k]) = level - 1.0 / gains(order[k]);
  return power;
}

namespace {

// Water-fills over the right singular vectors of `effective` and maps the
// result back through `basis` (N x b, orthonormal columns).
BaselineCovariance waterfill_through(const CMatrix& effective, const CMatrix& basis, double budget) {
  Eigen::JacobiSVD<CMatrix> svd(effective, Eigen::ComputeFullV);
  const RVector sigma = svd.singularValues();
  const CMatrix& v = svd.matrixV();
  BaselineCovariance out;
  if (sigma.size() == 0 || sigma(0) <= 0.0) {
    const CMatrix dir = basis.col(0);
    out.covariance.matrix = budget * dir * dir.adjoint();
    out.degenerate = true;
    return out;
  }
  const RVector p = water_filling(sigma.array().square().matrix(), budget);
  const CMatrix dirs = basis * v.leftCols(sigma.size());
  CMatrix q = dirs * p.cast<Complex>().asDiagonal() * dirs.adjoint();
  out.covariance.matrix = 0.5 * (q + q.adjoint());
  return out;
}

}  // namespace

BaselineCovariance eigen_beamforming(const ChannelSet& ch, int tx) {
  const int n = ch.tx_antennas();
  return waterfill_through(ch.channel(tx, tx), CMatrix::Identity(n, n), ch.power(tx));
}

BaselineCovariance zero_forcing(const ChannelSet& ch, int tx) {
  const int n = ch.tx_antennas();
  int cross_rows = 0;
  for (int j = 0; j < ch.users(); ++j) {
    if (j != tx) cross_rows += ch.rx_antennas(j);
  }
  CMatrix basis;
  if (cross_rows == 0) {
    basis = CMatrix::Identity(n, n);
  } else {
    // Null space of the stacked cross channels from the SVD of [H_ji^H]_{j != i}.
    CMatrix stacked(n, cross_rows);
    Eigen::Index col = 0;
    for (int j = 0; j < ch.users(); ++j) {
      if (j == tx) continue;
      const CMatrix& h = ch.channel(j, tx);
      stacked.middleCols(col, h.rows()) = h.adjoint();
      col += h.rows();
    }
    Eigen::JacobiSVD<CMatrix> svd(stacked, Eigen::ComputeFullU);
    const int rank = numerical_rank(svd.singularValues(), stacked.rows(), stacked.cols());
    if (rank >= n) throw InfeasibleError("cross channels leave no zero-forcing space");
    basis = svd.matrixU().rightCols(n - rank);
  }
  return waterfill_through(ch.channel(tx, tx) * basis, basis, ch.power(tx));
}

std::vector<Covariance> eigen_beamforming_all(const ChannelSet& ch) {
  std::vector<Covariance> out;
  for (int i = 0; i < ch.users(); ++i) out.push_back(eigen_beamforming(ch, i).covariance);
  return out;
}

std::vector<Covariance> zero_forcing_all(const ChannelSet& ch) {
  std::vector<Covariance> out;
  for (int i = 0; i < ch.users(); ++i) out.push_back(zero_forcing(ch, i).covariance);
  return out;
}

}  // namespace pareto_beam
