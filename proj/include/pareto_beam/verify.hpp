// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "pareto_beam/channel.hpp"

namespace pareto_beam {

/// Necessary-condition audit for one transmitter's covariance.
struct ParetoReport {
  double subspace_residual = 0.0;  // |Q - Pi Q Pi|_F / max(1, |Q|_F)
  double power_gap = 0.0;          // P_i - tr(Q_i)
};

/// Pi projects onto the column space of [H_1i^H, ..., H_Ki^H] (computed from
/// an SVD, independently of reduced_basis). The power gap only carries
/// meaning when N >= sum M_i.
std::vector<ParetoReport> check_pareto_necessary(const ChannelSet& ch, const std::vector<Covariance>& q);

struct SubspaceReport {
  double max_angle = 0.0;  // largest principal angle in radians
  int lhs_dim = 0;
  int rhs_dim = 0;
};

/// Two-user symmetric case: compares C([V11, Pi_{V21-perp} V11]) with
/// C([V11, V21]). Throws ConfigError unless K = 2, M_1 = M_2 = M, N >= 2M.
SubspaceReport check_two_user_subspace(const ChannelSet& ch);

/// Largest principal angle between the column spaces of `a` and `b`
/// (pi/2 when their numerical ranks differ).
double largest_principal_angle(const CMatrix& a, const CMatrix& b);

/// Phi_i = I + sum_{j != i} H_ij Q_j H_ij^H.
CMatrix interference_plus_noise(const ChannelSet& ch, int rx, const std::vector<Covariance>& q);

struct LemmaReport {
  double lhs = 0.0;   // log|Phi + H (Q' + delta v v^H) H^H|
  double rhs = 0.0;   // log|Phi + H Q' H^H|
  double gain = 0.0;  // lhs - rhs through the determinant lemma
  bool strict = false;
};

/// Adding power delta along v with H_ii v != 0 strictly raises the log-det.
/// Throws ContractViolation if H_ii v == 0 or delta <= 0.
LemmaReport check_lemma_strict_gain(const ChannelSet& ch, int i, const CMatrix& phi, const Covariance& q_prime,
                                    const CVector& v, double delta);

}  // namespace pareto_beam
