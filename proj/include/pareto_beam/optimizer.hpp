// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "pareto_beam/channel.hpp"
#include "pareto_beam/manifold.hpp"

namespace pareto_beam {

/// Search variable of one transmitter: Q = Upsilon U diag(lambda) U^H Upsilon^H.
struct UserParams {
  StiefelPoint u;
  SimplexPoint lambda;
};

using BeamParams = std::vector<UserParams>;

/// A smooth utility u(R_1, ..., R_K) of the per-pair rates.
class RateUtility {
 public:
  virtual ~RateUtility() = default;
  virtual double value(const std::vector<double>& rates) const = 0;
  /// du/dR_i at the given rates.
  virtual std::vector<double> rate_sensitivity(const std::vector<double>& rates) const = 0;
};

/// sum_i w_i R_i with w_i >= 0 and sum w_i == 1.
class WeightedSumRate final : public RateUtility {
 public:
  /// Throws ConfigError on negative weights or a sum away from 1 (1e-9).
  explicit WeightedSumRate(std::vector<double> weights);

  double value(const std::vector<double>& rates) const override;
  std::vector<double> rate_sensitivity(const std::vector<double>& rates) const override;
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> weights_;
};

std::vector<double> equal_weights(int users);

/// Everything the per-user searches need that does not change while
/// iterating: the channel set, the search bases Upsilon_i (padded to at
/// least M_i columns), the effective channels H_ik Upsilon_k, the budget
/// mode of each transmitter and the utility.
class BeamProblem {
 public:
  /// Computes the reduced bases from the channel set.
  BeamProblem(ChannelSet ch, std::shared_ptr<const RateUtility> utility);
  BeamProblem(ChannelSet ch, const std::vector<ReducedBasis>& bases, std::shared_ptr<const RateUtility> utility);

  const ChannelSet& channels() const { return ch_; }
  const std::vector<ReducedBasis>& bases() const { return bases_; }
  const RateUtility& utility() const { return *utility_; }
  BudgetMode mode(int user) const { return modes_.at(user); }
  int users() const { return ch_.users(); }

  /// U_i = [I; 0], lambda_i = P_i / M_i.
  BeamParams initial_params() const;
  /// Uniform random frames and uniform (Dirichlet(1)) power splits.
  BeamParams random_params(std::mt19937_64& rng) const;

  /// Per-pair rates in nats.
  std::vector<double> rates(const BeamParams& params) const;
  double utility_value(const BeamParams& params) const;

  /// Wirtinger derivative du/dU_k^* (m_k x M_k).
  CMatrix grad_u(const BeamParams& params, int k) const;
  /// du/dlambda_kl for l = 1..M_k.
  RVector grad_lambda(const BeamParams& params, int k) const;

  std::vector<Covariance> covariances(const BeamParams& params) const;

 private:
  struct Evaluation {
    std::vector<CMatrix> total;         // T_i = I + sum_j H_ij Q_j H_ij^H
    std::vector<CMatrix> interference;  // S_i = T_i - H_ii Q_i H_ii^H
  };
  Evaluation evaluate(const BeamParams& params) const;
  CMatrix weighted_curvature(const BeamParams& params, int k) const;
  void check_params(const BeamParams& params) const;

  ChannelSet ch_;
  std::vector<ReducedBasis> bases_;
  std::vector<std::vector<CMatrix>> effective_;  // effective_[i][k] = H_ik Upsilon_k
  std::vector<BudgetMode> modes_;
  std::shared_ptr<const RateUtility> utility_;
};

/// Pads Upsilon with orthonormal complement columns until it has at least
/// `min_cols` columns; a transmitter always needs room for M_i directions.
ReducedBasis search_basis(const ReducedBasis& rb, int min_cols);

/// Equality simplex when N >= sum M_i, half-space otherwise.
BudgetMode budget_mode(const ChannelSet& ch);

double wsr_utility(const ChannelSet& ch, const std::vector<ReducedBasis>& rb, const BeamParams& params,
                   const std::vector<double>& weights);
CMatrix wsr_grad_u(const ChannelSet& ch, const std::vector<ReducedBasis>& rb, const BeamParams& params,
                   const std::vector<double>& weights, int k);
RVector wsr_grad_lambda(const ChannelSet& ch, const std::vector<ReducedBasis>& rb, const BeamParams& params,
                        const std::vector<double>& weights, int k);

struct GradientCheck {
  double max_u_error = 0.0;       // worst relative error over the U directions
  double max_lambda_error = 0.0;  // worst relative error over the lambda directions
  int directions = 0;             // per user and per block
};

/// Compares grad_u and grad_lambda with central differences of the utility
/// along `directions` random directions per user: geodesics through U for
/// the U block, sum-zero moves of an interior lambda for the power block.
/// The error is |fd - analytic| / max(|fd|, |g| |d|, 1e-8).
GradientCheck check_gradients(const BeamProblem& problem, const BeamParams& params, std::mt19937_64& rng,
                              int directions = 10, double h = 1e-6);

struct SolverConfig {
  std::vector<double> weights;  // empty means equal weights
  double eps_outer = 1e-6;
  double eps_inner = 1e-6;
  double step_scale = 0.05;
  int max_outer_iters = 200;
  int max_inner_iters = 100;
  int max_backtracks = 20;
  bool expand_steps = true;          // U-step: also try doubling a successful trial step
  bool conjugate_directions = true;  // U-step: Polak-Ribiere+ directions instead of plain gradients
  double rank_threshold = 1e-3;
  int restarts = 0;
  std::uint64_t restart_seed = 0;
  bool audit = false;  // re-validate every covariance after each outer iteration

  /// Throws ConfigError on non-positive tolerances or invalid weights.
  void validate(int users) const;
};

struct InnerResult {
  UserParams params;
  double utility = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> utility_trace;  // entry value followed by one value per iteration
};

/// Previous U-step gradient and direction of one user, kept between calls so
/// conjugate directions survive short inner solves. An empty memory
/// (grad_sq == 0) starts from the plain gradient.
struct ConjugateMemory {
  CMatrix grad;
  CMatrix direction;
  double grad_sq = 0.0;
};

/// Alternating U-step / lambda-step ascent on V_{m_k, M_k} x H_{M_k} with the
/// other users fixed. The trial step is step_scale times the Frobenius norm
/// of the corresponding derivative. It is halved up to max_backtracks times
/// until the utility increases (a step that never does is skipped). U-steps
/// may follow conjugate directions and, with expand_steps, keep doubling the
/// step while the utility keeps increasing.
InnerResult inner_solve(const BeamProblem& problem, const BeamParams& params, int k, const SolverConfig& cfg,
                        ConjugateMemory* memory = nullptr);

struct OuterRecord {
  int iter = 0;
  double utility = 0.0;              // nats
  std::vector<double> rates;         // nats
  std::vector<double> grad_norms;    // |Riemannian U-gradient|, |feasible lambda direction| combined
  std::vector<RVector> lambdas;
};

struct SolveTrace {
  double initial_utility = 0.0;
  std::vector<OuterRecord> iterations;  // one record per completed sweep over the users
  BeamParams params;
  std::vector<ReducedBasis> bases;
  std::vector<Covariance> covariances;
  std::vector<double> rates;  // nats
  double utility = 0.0;       // nats
  std::vector<int> streams;
  std::vector<CMatrix> beamformers;  // empty matrix for a user with no active stream
  bool converged = false;
  int start_index = 0;  // 0 for the deterministic start, r for the r-th restart
  double seconds = 0.0;
};

/// Alternating per-user optimization from a given starting point.
SolveTrace solve_from(const BeamProblem& problem, BeamParams start, const SolverConfig& cfg);

/// Weighted-sum-rate beam design: deterministic start plus cfg.restarts random
/// starts; returns the trace of the best final utility.
SolveTrace solve(const ChannelSet& ch, const SolverConfig& cfg);

}  // namespace pareto_beam
