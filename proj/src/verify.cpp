// SPDX-License-Identifier: Apache-2.0
#include "pareto_beam/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pareto_beam {

namespace {

CMatrix orthonormal_range(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU);
  const int rank = numerical_rank(svd.singularValues(), a.rows(), a.cols());
  return svd.matrixU().leftCols(rank);
}

}  // namespace

std::vector<ParetoReport> check_pareto_necessary(const ChannelSet& ch, const std::vector<Covariance>& q) {
  if (static_cast<int>(q.size()) != ch.users()) throw ContractViolation("one covariance per transmitter is required");
  std::vector<ParetoReport> out;
  for (int i = 0; i < ch.users(); ++i) {
    const CMatrix basis = orthonormal_range(stacked_channels(ch, i));
    const CMatrix proj = basis * basis.adjoint();
    const CMatrix& qi = q[i].matrix;
    ParetoReport rep;
    rep.subspace_residual = (qi - proj * qi * proj).norm() / std::max(1.0, qi.norm());
    rep.power_gap = ch.power(i) - qi.trace().real();
    out.push_back(rep);
  }
  return out;
}

double largest_principal_angle(const CMatrix& a, const CMatrix& b) {
  const CMatrix qa = orthonormal_range(a);
  const CMatrix qb = orthonormal_range(b);
  if (qa.cols() != qb.cols()) return std::numbers::pi / 2.0;
  if (qa.cols() == 0) return 0.0;
  // sin of the largest angle is the spectral norm of the part of qa outside qb.
  const CMatrix outside = qa - qb * (qb.adjoint() * qa);
  Eigen::JacobiSVD<CMatrix> svd(outside);
  return std::asin(std::min(1.0, svd.singularValues()(0)));
}

SubspaceReport check_two_user_subspace(const ChannelSet& ch) {
  if (ch.users() != 2) throw ConfigError("the two-user subspace check needs K = 2");
  const int m = ch.rx_antennas(0);
  if (ch.rx_antennas(1) != m) throw ConfigError("the two-user subspace check needs M_1 = M_2");
  if (ch.tx_antennas() < 2 * m) throw ConfigError("the two-user subspace check needs N >= 2M");

  const SvdSpaces s11 = svd_spaces(ch.channel(0, 0));
  const SvdSpaces s21 = svd_spaces(ch.channel(1, 0));
  const CMatrix& v11 = s11.v_parallel;

  CMatrix lhs(ch.tx_antennas(), 2 * m);
  lhs << v11, s21.v_perp * (s21.v_perp.adjoint() * v11);
  CMatrix rhs(ch.tx_antennas(), 2 * m);
  rhs << v11, s21.v_parallel;

  SubspaceReport rep;
  rep.lhs_dim = static_cast<int>(orthonormal_range(lhs).cols());
  rep.rhs_dim = static_cast<int>(orthonormal_range(rhs).cols());
  rep.max_angle = largest_principal_angle(lhs, rhs);
  return rep;
}

CMatrix interference_plus_noise(const ChannelSet& ch, int rx, const std::vector<Covariance>& q) {
  const int mi = ch.rx_antennas(rx);
  CMatrix phi = CMatrix::Identity(mi, mi);
  for (int j = 0; j < ch.users(); ++j) {
    if (j == rx) continue;
    const CMatrix& h = ch.channel(rx, j);
    phi += h * q.at(j).matrix * h.adjoint();
  }
  return 0.5 * (phi + phi.adjoint());
}

LemmaReport check_lemma_strict_gain(const ChannelSet& ch, int i, const CMatrix& phi, const Covariance& q_prime,
                                    const CVector& v, double delta) {
  const CMatrix& h = ch.channel(i, i);
  if (!(delta > 0.0)) throw ContractViolation("delta must be positive");
  if (v.size() != h.cols()) throw ContractViolation("v must have N entries");
  const CVector hv = h * v;
  if (hv.norm() <= 1e-12 * std::max(1.0, h.norm() * v.norm())) {
    throw ContractViolation("H_ii v is zero; the strict gain is not claimed");
  }
  CMatrix base = phi + h * q_prime.matrix * h.adjoint();
  base = 0.5 * (base + base.adjoint());
  CMatrix raised = base + delta * hv * hv.adjoint();
  raised = 0.5 * (raised + raised.adjoint());

  LemmaReport rep;
  rep.rhs = log_det_hpd(base);
  rep.lhs = log_det_hpd(raised);
  Eigen::LLT<CMatrix> llt(base);
  const double quad = hv.dot(llt.solve(hv)).real();
  rep.gain = std::log1p(delta * quad);
  rep.strict = rep.gain > 0.0 && rep.lhs >= rep.rhs;
  return rep;
}

}  // namespace pareto_beam
