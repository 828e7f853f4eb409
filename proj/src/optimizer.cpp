// SPDX-License-Identifier: Apache-2.0
#include "pareto_beam/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

namespace pareto_beam {

WeightedSumRate::WeightedSumRate(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ConfigError("weights must not be empty");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("weights must sum to 1");
}

double WeightedSumRate::value(const std::vector<double>& rates) const {
  if (rates.size() != weights_.size()) throw ContractViolation("rate count does not match weight count");
  return std::inner_product(rates.begin(), rates.end(), weights_.begin(), 0.0);
}

std::vector<double> WeightedSumRate::rate_sensitivity(const std::vector<double>& /*rates*/) const {
  return weights_;
}

std::vector<double> equal_weights(int users) {
  return std::vector<double>(static_cast<std::size_t>(users), 1.0 / users);
}

ReducedBasis search_basis(const ReducedBasis& rb, int min_cols) {
  const Eigen::Index m = rb.upsilon.cols();
  if (m >= min_cols) return rb;
  const Eigen::Index n = rb.upsilon.rows();
  if (min_cols > n) throw ContractViolation("search basis cannot exceed the transmit dimension");
  Eigen::HouseholderQR<CMatrix> qr(rb.upsilon);
  const CMatrix full_q = qr.householderQ();
  ReducedBasis out = rb;
  out.upsilon.conservativeResize(n, min_cols);
  out.upsilon.rightCols(min_cols - m) = full_q.middleCols(m, min_cols - m);
  out.r.conservativeResize(min_cols, rb.r.cols());
  out.r.bottomRows(min_cols - m).setZero();
  return out;
}

BudgetMode budget_mode(const ChannelSet& ch) {
  return ch.tx_antennas() >= ch.total_rx_antennas() ? BudgetMode::equality : BudgetMode::half_space;
}

namespace {

std::vector<ReducedBasis> all_bases(const ChannelSet& ch) {
  std::vector<ReducedBasis> out;
  out.reserve(ch.users());
  for (int i = 0; i < ch.users(); ++i) out.push_back(reduced_basis(ch, i));
  return out;
}

CMatrix hermitian_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

CMatrix hpd_inverse(const CMatrix& a) {
  Eigen::LLT<CMatrix> llt(a);
  if (llt.info() != Eigen::Success) throw InternalError("noise-plus-interference matrix is not positive definite");
  return llt.solve(CMatrix::Identity(a.rows(), a.cols()));
}

}  // namespace

BeamProblem::BeamProblem(ChannelSet ch, std::shared_ptr<const RateUtility> utility)
    : BeamProblem(ch, all_bases(ch), std::move(utility)) {}

BeamProblem::BeamProblem(ChannelSet ch, const std::vector<ReducedBasis>& bases,
                         std::shared_ptr<const RateUtility> utility)
    : ch_(std::move(ch)), utility_(std::move(utility)) {
  const int k = ch_.users();
  if (static_cast<int>(bases.size()) != k) throw ContractViolation("one reduced basis per transmitter is required");
  if (!utility_) throw ContractViolation("a utility is required");
  bases_.reserve(k);
  for (int i = 0; i < k; ++i) {
    if (bases[i].upsilon.rows() != ch_.tx_antennas()) throw ContractViolation("basis has the wrong row count");
    bases_.push_back(search_basis(bases[i], ch_.rx_antennas(i)));
  }
  effective_.assign(k, std::vector<CMatrix>(k));
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) effective_[i][j] = ch_.channel(i, j) * bases_[j].upsilon;
  }
  modes_.assign(k, budget_mode(ch_));
}

BeamParams BeamProblem::initial_params() const {
  BeamParams out;
  out.reserve(users());
  for (int i = 0; i < users(); ++i) {
    const int mi = ch_.rx_antennas(i);
    out.push_back({StiefelPoint::leading_identity(bases_[i].upsilon.cols(), mi),
                   SimplexPoint::uniform(mi, ch_.power(i), modes_[i])});
  }
  return out;
}

BeamParams BeamProblem::random_params(std::mt19937_64& rng) const {
  BeamParams out;
  out.reserve(users());
  std::exponential_distribution<double> expo(1.0);
  for (int i = 0; i < users(); ++i) {
    const int mi = ch_.rx_antennas(i);
    StiefelPoint u = random_stiefel(bases_[i].upsilon.cols(), mi, rng);
    RVector lam(mi);
    for (int l = 0; l < mi; ++l) lam(l) = expo(rng);
    lam *= ch_.power(i) / lam.sum();
    // Rounding can leave the sum a few ulps off the budget.
    lam(mi - 1) = std::max(0.0, ch_.power(i) - (lam.sum() - lam(mi - 1)));
    out.push_back({std::move(u), SimplexPoint(std::move(lam), ch_.power(i), modes_[i])});
  }
  return out;
}

void BeamProblem::check_params(const BeamParams& params) const {
  if (static_cast<int>(params.size()) != users()) throw ContractViolation("one parameter pair per transmitter is required");
  for (int i = 0; i < users(); ++i) {
    if (params[i].u.rows() != bases_[i].upsilon.cols() || params[i].u.cols() != ch_.rx_antennas(i) ||
        params[i].lambda.size() != ch_.rx_antennas(i)) {
      throw ContractViolation("parameters of transmitter " + std::to_string(i) + " have the wrong shape");
    }
  }
}

BeamProblem::Evaluation BeamProblem::evaluate(const BeamParams& params) const {
  check_params(params);
  const int k = users();
  Evaluation ev;
  ev.total.resize(k);
  ev.interference.resize(k);
  for (int i = 0; i < k; ++i) {
    const int mi = ch_.rx_antennas(i);
    CMatrix total = CMatrix::Identity(mi, mi);
    CMatrix own;
    for (int j = 0; j < k; ++j) {
      const CMatrix f = effective_[i][j] * params[j].u.matrix();
      CMatrix term = f * params[j].lambda.lambda().cast<Complex>().asDiagonal() * f.adjoint();
      if (j == i) own = term;
      total += term;
    }
    ev.total[i] = hermitian_part(total);
    ev.interference[i] = hermitian_part(total - own);
  }
  return ev;
}

std::vector<double> BeamProblem::rates(const BeamParams& params) const {
  const Evaluation ev = evaluate(params);
  std::vector<double> out(users());
  for (int i = 0; i < users(); ++i) {
    out[i] = std::max(0.0, log_det_hpd(ev.total[i]) - log_det_hpd(ev.interference[i]));
  }
  return out;
}

double BeamProblem::utility_value(const BeamParams& params) const { return utility_->value(rates(params)); }

// Hermitian m_k x m_k matrix W with du = tr(W dZ_k), Z_k = U_k Lambda_k U_k^H:
//   W = sum_i s_i G_ik^H X_ik G_ik,  G_ik = H_ik Upsilon_k,
//   X_kk = T_k^-1,  X_ik = T_i^-1 - S_i^-1 (i != k),
// where s_i = du/dR_i. It follows from d log|T| = tr(T^-1 dT).
CMatrix BeamProblem::weighted_curvature(const BeamParams& params, int k) const {
  const Evaluation ev = evaluate(params);
  std::vector<double> r(users());
  for (int i = 0; i < users(); ++i) {
    r[i] = std::max(0.0, log_det_hpd(ev.total[i]) - log_det_hpd(ev.interference[i]));
  }
  const std::vector<double> sens = utility_->rate_sensitivity(r);

  const Eigen::Index m = bases_[k].upsilon.cols();
  CMatrix w = CMatrix::Zero(m, m);
  for (int i = 0; i < users(); ++i) {
    if (sens[i] == 0.0) continue;
    const CMatrix& g = effective_[i][k];
    if (g.isZero(0.0)) continue;
    CMatrix x = hpd_inverse(ev.total[i]);
    if (i != k) x -= hpd_inverse(ev.interference[i]);
    w += sens[i] * (g.adjoint() * x * g);
  }
  return hermitian_part(w);
}

CMatrix BeamProblem::grad_u(const BeamParams& params, int k) const {
  const CMatrix w = weighted_curvature(params, k);
  return w * params[k].u.matrix() * params[k].lambda.lambda().cast<Complex>().asDiagonal();
}

RVector BeamProblem::grad_lambda(const BeamParams& params, int k) const {
  const CMatrix w = weighted_curvature(params, k);
  const CMatrix& u = params[k].u.matrix();
  return (u.adjoint() * w * u).diagonal().real();
}

std::vector<Covariance> BeamProblem::covariances(const BeamParams& params) const {
  check_params(params);
  std::vector<Covariance> out;
  out.reserve(users());
  for (int i = 0; i < users(); ++i) {
    out.push_back(covariance_from_params(bases_[i], params[i].u.matrix(), params[i].lambda.lambda()));
  }
  return out;
}

double wsr_utility(const ChannelSet& ch, const std::vector<ReducedBasis>& rb, const BeamParams& params,
                   const std::vector<double>& weights) {
  return BeamProblem(ch, rb, std::make_shared<WeightedSumRate>(weights)).utility_value(params);
}

CMatrix wsr_grad_u(const ChannelSet& ch, const std::vector<ReducedBasis>& rb, const BeamParams& params,
                   const std::vector<double>& weights, int k) {
  return BeamProblem(ch, rb, std::make_shared<WeightedSumRate>(weights)).grad_u(params, k);
}

RVector wsr_grad_lambda(const ChannelSet& ch, const std::vector<ReducedBasis>& rb, const BeamParams& params,
                        const std::vector<double>& weights, int k) {
  return BeamProblem(ch, rb, std::make_shared<WeightedSumRate>(weights)).grad_lambda(params, k);
}

void SolverConfig::validate(int users) const {
  if (!(eps_outer > 0.0) || !(eps_inner > 0.0)) throw ConfigError("stopping tolerances must be positive");
  if (!(step_scale > 0.0)) throw ConfigError("step_scale must be positive");
  if (max_outer_iters < 1 || max_inner_iters < 1) throw ConfigError("iteration limits must be at least 1");
  if (max_backtracks < 0) throw ConfigError("max_backtracks must be non-negative");
  if (!(rank_threshold > 0.0) || rank_threshold >= 1.0) throw ConfigError("rank_threshold must lie in (0, 1)");
  if (restarts < 0) throw ConfigError("restarts must be non-negative");
  if (!weights.empty()) {
    if (static_cast<int>(weights.size()) != users) throw ConfigError("one weight per transmitter is required");
    WeightedSumRate check(weights);
  }
}

namespace {

constexpr double kStationary = 1e-10;

struct StepOutcome {
  bool moved = false;
  double utility = 0.0;
  double tau = 0.0;
};

// Trial step tau; halves it until `candidate(tau)` beats the current utility.
// With `expand`, a successful first trial is followed by doublings for as
// long as each one improves on the last, and the best trial is returned.
template <typename Candidate>
StepOutcome line_search(double tau, int max_trials, bool expand, double current, Candidate&& candidate) {
  const double first = candidate(tau);
  if (first > current) {
    StepOutcome best{true, first, tau};
    if (expand) {
      for (int e = 0; e < max_trials; ++e) {
        const double value = candidate(best.tau * 2.0);
        if (!(value > best.utility)) break;
        best = {true, value, best.tau * 2.0};
      }
    }
    return best;
  }
  for (int b = 1; b <= max_trials; ++b) {
    tau *= 0.5;
    const double value = candidate(tau);
    if (value > current) return {true, value, tau};
  }
  return {false, current, 0.0};
}

double user_grad_norm(const BeamProblem& problem, const BeamParams& params, int k) {
  const CMatrix g = problem.grad_u(params, k);
  const double u_norm = riemannian_grad(params[k].u, 2.0 * g).matrix().norm();
  const double l_norm = simplex_ascent_direction(params[k].lambda, problem.grad_lambda(params, k)).norm();
  return std::hypot(u_norm, l_norm);
}

}  // namespace

InnerResult inner_solve(const BeamProblem& problem, const BeamParams& params, int k, const SolverConfig& cfg,
                        ConjugateMemory* memory) {
  if (k < 0 || k >= problem.users()) throw ContractViolation("user index out of range");
  BeamParams work = params;
  double current = problem.utility_value(work);
  ConjugateMemory local;
  ConjugateMemory& mem = memory ? *memory : local;

  InnerResult out{work[k], current, 0, false, {current}};
  for (int it = 1; it <= cfg.max_inner_iters; ++it) {
    const double start = current;

    // U step: ascend along the geodesic, in the Riemannian gradient direction
    // or, with conjugate directions, a Polak-Ribiere+ combination of it with
    // the previous direction carried over by tangent projection.
    const CMatrix g_u = problem.grad_u(work, k);
    const TangentVec grad = riemannian_grad(work[k].u, 2.0 * g_u);
    TangentVec direction = grad;
    if (cfg.conjugate_directions && mem.grad_sq > 0.0) {
      const TangentVec moved_grad = project_to_tangent(work[k].u, mem.grad);
      const TangentVec moved_dir = project_to_tangent(work[k].u, mem.direction);
      const double beta =
          std::max(0.0, (canonical_metric(grad, grad) - canonical_metric(grad, moved_grad)) / mem.grad_sq);
      const TangentVec candidate = project_to_tangent(work[k].u, grad.matrix() + beta * moved_dir.matrix());
      if (canonical_metric(grad, candidate) > 0.0) direction = candidate;
    }
    mem = {};
    if (direction.matrix().norm() > kStationary) {
      const StiefelPoint base = work[k].u;
      const StepOutcome step = line_search(cfg.step_scale * g_u.norm(), cfg.max_backtracks, cfg.expand_steps, current,
                                           [&](double tau) {
                                             work[k].u = geodesic(base, direction, tau);
                                             return problem.utility_value(work);
                                           });
      if (step.moved) {
        work[k].u = geodesic(base, direction, step.tau);
        mem = {grad.matrix(), direction.matrix(), canonical_metric(grad, grad)};
      } else {
        work[k].u = base;
      }
      current = step.utility;
    }

    // Lambda step: projected gradient on the power simplex.
    const RVector g_l = problem.grad_lambda(work, k);
    const RVector eta = simplex_ascent_direction(work[k].lambda, g_l);
    if (eta.norm() > kStationary) {
      const SimplexPoint base = work[k].lambda;
      // No expansion here: larger power moves commit users to single streams
      // before the interference picture has settled.
      const StepOutcome step = line_search(cfg.step_scale * g_l.norm(), cfg.max_backtracks, false, current,
                                           [&](double tau) {
                                             work[k].lambda = simplex_step(base, eta, tau);
                                             return problem.utility_value(work);
                                           });
      work[k].lambda = step.moved ? simplex_step(base, eta, step.tau) : base;
      current = step.utility;
    }

    out.iterations = it;
    out.utility_trace.push_back(current);
    if (std::abs(current - start) <= cfg.eps_inner) {
      out.converged = true;
      break;
    }
  }
  out.params = work[k];
  out.utility = current;
  return out;
}

GradientCheck check_gradients(const BeamProblem& problem, const BeamParams& params, std::mt19937_64& rng,
                              int directions, double h) {
  if (directions < 1 || !(h > 0.0)) throw ContractViolation("check_gradients needs directions >= 1 and h > 0");
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto relative = [](double fd, double an, double scale) {
    return std::abs(fd - an) / std::max({std::abs(fd), scale, 1e-8});
  };

  GradientCheck out;
  out.directions = directions;
  for (int k = 0; k < problem.users(); ++k) {
    const CMatrix g_u = problem.grad_u(params, k);
    const RVector g_l = problem.grad_lambda(params, k);
    const StiefelPoint& u = params[k].u;
    for (int d = 0; d < directions; ++d) {
      CMatrix x(u.rows(), u.cols());
      for (Eigen::Index c = 0; c < x.size(); ++c) x(c) = Complex(gauss(rng), gauss(rng));
      const TangentVec dir = project_to_tangent(u, x);
      const TangentVec back = dir.scaled(-1.0);
      BeamParams plus = params;
      BeamParams minus = params;
      plus[k].u = geodesic(u, dir, h);
      minus[k].u = geodesic(u, back, h);
      const double fd = (problem.utility_value(plus) - problem.utility_value(minus)) / (2.0 * h);
      const double an = 2.0 * (g_u.adjoint() * dir.matrix()).trace().real();
      out.max_u_error = std::max(out.max_u_error, relative(fd, an, 2.0 * g_u.norm() * dir.matrix().norm()));
    }

    const RVector& lam = params[k].lambda.lambda();
    if (lam.size() < 2 || lam.minCoeff() <= 0.0) continue;
    for (int d = 0; d < directions; ++d) {
      RVector v(lam.size());
      for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = gauss(rng);
      v = simplex_tangent_project(v);
      // Keep both probes inside the simplex.
      const double step = std::min(h, 0.5 * lam.minCoeff() / v.cwiseAbs().maxCoeff());
      BeamParams plus = params;
      BeamParams minus = params;
      const double budget = params[k].lambda.budget();
      const BudgetMode mode = params[k].lambda.mode();
      plus[k].lambda = SimplexPoint(lam + step * v, budget, mode);
      minus[k].lambda = SimplexPoint(lam - step * v, budget, mode);
      const double fd = (problem.utility_value(plus) - problem.utility_value(minus)) / (2.0 * step);
      const double an = g_l.dot(v);
      out.max_lambda_error = std::max(out.max_lambda_error, relative(fd, an, g_l.norm() * v.norm()));
    }
  }
  return out;
}

SolveTrace solve_from(const BeamProblem& problem, BeamParams start, const SolverConfig& cfg) {
  cfg.validate(problem.users());
  const auto t0 = std::chrono::steady_clock::now();
  const int users = problem.users();

  SolveTrace trace;
  trace.bases = problem.bases();
  BeamParams params = std::move(start);
  double previous = problem.utility_value(params);
  trace.initial_utility = previous;

  std::vector<ConjugateMemory> memory(users);
  for (int iter = 1; iter <= cfg.max_outer_iters; ++iter) {
    for (int k = 0; k < users; ++k) {
      InnerResult inner = inner_solve(problem, params, k, cfg, &memory[k]);
      params[k] = std::move(inner.params);
    }
    OuterRecord rec;
    rec.iter = iter;
    rec.rates = problem.rates(params);
    rec.utility = problem.utility().value(rec.rates);
    for (int k = 0; k < users; ++k) {
      rec.grad_norms.push_back(user_grad_norm(problem, params, k));
      rec.lambdas.push_back(params[k].lambda.lambda());
    }
    if (cfg.audit) {
      const auto qs = problem.covariances(params);
      for (int k = 0; k < users; ++k) qs[k].validate(problem.channels().power(k));
    }
    const double change = rec.utility - previous;
    previous = rec.utility;
    trace.iterations.push_back(std::move(rec));
    if (std::abs(change) <= cfg.eps_outer) {
      trace.converged = true;
      break;
    }
  }

  const ChannelSet& ch = problem.channels();
  trace.covariances = problem.covariances(params);
  trace.rates = problem.rates(params);
  trace.utility = problem.utility().value(trace.rates);
  for (int k = 0; k < users; ++k) {
    const RVector& lam = params[k].lambda.lambda();
    trace.streams.push_back(stream_count(lam, cfg.rank_threshold, ch.power(k)));
    if (trace.streams.back() > 0) {
      trace.beamformers.push_back(
          beamformer_matrix(problem.bases()[k], params[k].u.matrix(), lam, cfg.rank_threshold, ch.power(k)));
    } else {
      trace.beamformers.emplace_back(ch.tx_antennas(), 0);
    }
  }
  trace.params = std::move(params);
  trace.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return trace;
}

SolveTrace solve(const ChannelSet& ch, const SolverConfig& cfg) {
  cfg.validate(ch.users());
  const auto t0 = std::chrono::steady_clock::now();
  auto utility = std::make_shared<WeightedSumRate>(cfg.weights.empty() ? equal_weights(ch.users()) : cfg.weights);
  const BeamProblem problem(ch, utility);

  SolveTrace best = solve_from(problem, problem.initial_params(), cfg);
  std::mt19937_64 rng(cfg.restart_seed);
  for (int r = 1; r <= cfg.restarts; ++r) {
    SolveTrace candidate = solve_from(problem, problem.random_params(rng), cfg);
    candidate.start_index = r;
    if (candidate.utility > best.utility) best = std::move(candidate);
  }
  best.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return best;
}

}  // namespace pareto_beam
