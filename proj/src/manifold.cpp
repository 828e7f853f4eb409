// SPDX-License-Identifier: Apache-2.0
#include "pareto_beam/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

namespace pareto_beam {

namespace {

// Q factor of a thin QR with the phase of each diagonal entry of R moved
// into Q, so that a frame that is already orthonormal maps to itself.
CMatrix phase_fixed_q(const CMatrix& a) {
  const Eigen::Index n = a.rows();
  const Eigen::Index p = a.cols();
  Eigen::HouseholderQR<CMatrix> qr(a);
  CMatrix q = qr.householderQ() * CMatrix::Identity(n, p);
  const CMatrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < p; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

double skew_residual(const CMatrix& u, const CMatrix& d) {
  if (d.size() == 0) return 0.0;
  const CMatrix a = u.adjoint() * d;
  return (a + a.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace

StiefelPoint::StiefelPoint(CMatrix u) : u_(std::move(u)) {
  if (u_.cols() > u_.rows()) throw ContractViolation("Stiefel point needs at least as many rows as columns");
  if (orthonormality_error(u_) > kTolerance) throw ContractViolation("frame is not orthonormal");
}

StiefelPoint StiefelPoint::leading_identity(Eigen::Index n, Eigen::Index p) {
  return StiefelPoint(CMatrix::Identity(n, p));
}

TangentVec::TangentVec(const StiefelPoint& base, CMatrix delta) : base_(base.matrix()), delta_(std::move(delta)) {
  if (delta_.rows() != base_.rows() || delta_.cols() != base_.cols()) {
    throw ContractViolation("tangent vector shape does not match its base point");
  }
  const double scale = std::max(1.0, delta_.norm());
  if (skew_residual(base_, delta_) > 1e-10 * scale) {
    throw ContractViolation("U^H Delta is not skew-Hermitian");
  }
}

TangentVec TangentVec::scaled(double s) const { return TangentVec(Unchecked{}, base_, s * delta_); }

TangentVec project_to_tangent(const StiefelPoint& u, const CMatrix& x) {
  const CMatrix& um = u.matrix();
  const CMatrix ux = um.adjoint() * x;
  return TangentVec(TangentVec::Unchecked{}, um, x - um * (0.5 * (ux + ux.adjoint())));
}

TangentVec riemannian_grad(const StiefelPoint& u, const CMatrix& f_u) {
  const CMatrix& um = u.matrix();
  if (f_u.rows() != um.rows() || f_u.cols() != um.cols()) {
    throw ContractViolation("partial-derivative matrix shape does not match the point");
  }
  // The raw formula is tangent only up to the frame's drift times |f_u|;
  // projecting removes that first-order residual.
  const TangentVec grad = project_to_tangent(u, f_u - um * (f_u.adjoint() * um));
  return TangentVec(u, grad.matrix());
}

double canonical_metric(const TangentVec& d1, const TangentVec& d2) {
  if (d1.base().rows() != d2.base().rows() || d1.base().cols() != d2.base().cols() ||
      d1.base() != d2.base()) {
    throw ContractViolation("tangent vectors live at different base points");
  }
  const CMatrix& u = d1.base();
  const CMatrix& a = d1.matrix();
  const CMatrix& b = d2.matrix();
  // tr(A^H B) - tr((U^H A)^H (U^H B)) / 2
  const Complex full = (a.adjoint() * b).trace();
  const Complex part = ((u.adjoint() * a).adjoint() * (u.adjoint() * b)).trace();
  return (full - 0.5 * part).real();
}

CMatrix reorthonormalize(const CMatrix& u) { return phase_fixed_q(u); }

StiefelPoint geodesic(const StiefelPoint& u, const TangentVec& d, double t) {
  if (t < 0.0) throw ContractViolation("geodesic time must be non-negative");
  if (d.base().rows() != u.rows() || d.base().cols() != u.cols() || d.base() != u.matrix()) {
    throw ContractViolation("tangent vector does not belong to this point");
  }
  if (t == 0.0) return u;

  const CMatrix& um = u.matrix();
  const Eigen::Index n = um.rows();
  const Eigen::Index p = um.cols();

  CMatrix a = um.adjoint() * d.matrix();
  a = 0.5 * (a - a.adjoint());
  const CMatrix normal = d.matrix() - um * (um.adjoint() * d.matrix());

  Eigen::HouseholderQR<CMatrix> qr(normal);
  const CMatrix q = qr.householderQ() * CMatrix::Identity(n, p);
  const CMatrix r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();

  CMatrix generator = CMatrix::Zero(2 * p, 2 * p);
  generator.topLeftCorner(p, p) = a;
  generator.topRightCorner(p, p) = -r.adjoint();
  generator.bottomLeftCorner(p, p) = r;
  const CMatrix e = (t * generator).exp();

  CMatrix next = um * e.topLeftCorner(p, p) + q * e.bottomLeftCorner(p, p);
  if (orthonormality_error(next) > StiefelPoint::kTolerance) next = reorthonormalize(next);
  return StiefelPoint(std::move(next));
}

StiefelPoint random_stiefel(Eigen::Index n, Eigen::Index p, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  CMatrix g(n, p);
  for (Eigen::Index c = 0; c < p; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      g(r, c) = Complex(re, im);
    }
  }
  return StiefelPoint(phase_fixed_q(g));
}

SimplexPoint::SimplexPoint(RVector lambda, double budget, BudgetMode mode)
    : lambda_(std::move(lambda)), budget_(budget), mode_(mode) {
  if (!(budget_ >= 0.0)) throw ContractViolation("power budget must be non-negative");
  if (lambda_.size() > 0 && lambda_.minCoeff() < 0.0) throw ContractViolation("power split has a negative entry");
  const double tol = 1e-10 * std::max(1.0, budget_);
  const double total = lambda_.sum();
  if (mode_ == BudgetMode::equality && std::abs(total - budget_) > tol) {
    throw ContractViolation("power split does not sum to the budget");
  }
  if (mode_ == BudgetMode::half_space && total > budget_ + tol) {
    throw ContractViolation("power split exceeds the budget");
  }
}

SimplexPoint SimplexPoint::uniform(Eigen::Index p, double budget, BudgetMode mode) {
  return SimplexPoint(RVector::Constant(p, budget / static_cast<double>(p)), budget, mode);
}

RVector simplex_tangent_project(const RVector& eta) {
  if (eta.size() == 0) return eta;
  return (eta.array() - eta.mean()).matrix();
}

SimplexPoint simplex_step(const SimplexPoint& lam, const RVector& v, double tau) {
  const RVector& x = lam.lambda();
  if (v.size() != x.size()) throw ContractViolation("direction size does not match the power split");
  const double v_sum = v.sum();
  if (lam.mode() == BudgetMode::equality && std::abs(v_sum) > 1e-10 * std::max(1.0, v.lpNorm<1>())) {
    throw ContractViolation("direction must sum to zero on the simplex");
  }
  if (!(tau > 0.0) || v.isZero(0.0)) return lam;

  double limit = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (v(j) < 0.0) limit = std::min(limit, x(j) / -v(j));
  }
  double budget_limit = std::numeric_limits<double>::infinity();
  if (lam.mode() == BudgetMode::half_space && v_sum > 0.0) {
    budget_limit = std::max(0.0, lam.budget() - x.sum()) / v_sum;
  }

  const double s = std::min({tau, limit, budget_limit});
  RVector next = x + s * v;
  if (s == limit) {
    // Every coordinate whose own limit equals the common one hits zero.
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      if (v(j) < 0.0 && x(j) / -v(j) <= limit) next(j) = 0.0;
    }
  }
  next = next.cwiseMax(0.0);
  if (lam.mode() == BudgetMode::half_space && next.sum() > lam.budget()) {
    next *= lam.budget() / next.sum();
  }
  return SimplexPoint(std::move(next), lam.budget(), lam.mode());
}

RVector simplex_ascent_direction(const SimplexPoint& lam, const RVector& g) {
  const RVector& x = lam.lambda();
  const Eigen::Index p = x.size();
  if (g.size() != p) throw ContractViolation("gradient size does not match the power split");
  const double zero_tol = 1e-14 * std::max(1.0, lam.budget());
  const bool at_budget =
      lam.mode() == BudgetMode::equality || x.sum() >= lam.budget() - 1e-12 * std::max(1.0, lam.budget());

  std::vector<bool> frozen(p, false);
  RVector d = RVector::Zero(p);
  for (;;) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!frozen[j]) free.push_back(j);
    }
    d.setZero();
    if (free.empty()) return d;

    RVector sub(static_cast<Eigen::Index>(free.size()));
    for (std::size_t k = 0; k < free.size(); ++k) sub(k) = g(free[k]);
    if (at_budget && (lam.mode() == BudgetMode::equality || sub.sum() > 0.0)) {
      sub = simplex_tangent_project(sub);
    }
    for (std::size_t k = 0; k < free.size(); ++k) d(free[k]) = sub(k);

    bool changed = false;
    for (Eigen::Index j : free) {
      if (x(j) <= zero_tol && d(j) < 0.0) {
        frozen[j] = true;
        changed = true;
      }
    }
    if (!changed) return d;
  }
}

}  // namespace pareto_beam
