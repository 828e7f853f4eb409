// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>

#include "pareto_beam/types.hpp"

namespace pareto_beam {

/// A point on the complex Stiefel manifold V_{n,p}: an n x p matrix with
/// orthonormal columns.
class StiefelPoint {
 public:
  /// Throws ContractViolation if max|U^H U - I| > kTolerance.
  explicit StiefelPoint(CMatrix u);

  /// [I_p; 0], the canonical first point of V_{n,p}.
  static StiefelPoint leading_identity(Eigen::Index n, Eigen::Index p);

  const CMatrix& matrix() const { return u_; }
  Eigen::Index rows() const { return u_.rows(); }
  Eigen::Index cols() const { return u_.cols(); }

  static constexpr double kTolerance = 1e-10;

 private:
  CMatrix u_;
};

/// A tangent vector Delta at `base`, i.e. U^H Delta is skew-Hermitian.
class TangentVec {
 public:
  /// Throws ContractViolation if the shapes differ or U^H D + D^H U is not
  /// zero within 1e-10 (relative to max(1, |D|_F)).
  TangentVec(const StiefelPoint& base, CMatrix delta);

  const CMatrix& matrix() const { return delta_; }
  const CMatrix& base() const { return base_; }

  TangentVec scaled(double s) const;

 private:
  struct Unchecked {};
  TangentVec(Unchecked, CMatrix base, CMatrix delta) : base_(std::move(base)), delta_(std::move(delta)) {}
  friend TangentVec project_to_tangent(const StiefelPoint&, const CMatrix&);

  CMatrix base_;
  CMatrix delta_;
};

/// Orthogonal projection X - U sym(U^H X) onto the tangent space at U.
TangentVec project_to_tangent(const StiefelPoint& u, const CMatrix& x);

/// Riemannian gradient under the canonical metric: f_U - U f_U^H U, where
/// f_U is the matrix of real partials (for a real function of a complex U
/// this is twice the Wirtinger derivative with respect to U^*).
TangentVec riemannian_grad(const StiefelPoint& u, const CMatrix& f_u);

/// Re tr(D1^H (I - U U^H / 2) D2). Throws ContractViolation when the two
/// vectors live at different base points.
double canonical_metric(const TangentVec& d1, const TangentVec& d2);

/// Geodesic U(t) = U M(t) + Q N(t) with Q R the skinny QR of (I - U U^H) D
/// and [M; N] = exp(t [[A, -R^H], [R, 0]]) [I; 0], A = U^H D. The result is
/// re-orthonormalized if floating-point drift exceeds kTolerance.
StiefelPoint geodesic(const StiefelPoint& u, const TangentVec& d, double t);

/// Nearest-phase QR re-orthonormalization of a nearly orthonormal frame.
CMatrix reorthonormalize(const CMatrix& u);

/// Uniformly random frame: QR of a complex Gaussian matrix with the phases
/// of R's diagonal absorbed into Q.
StiefelPoint random_stiefel(Eigen::Index n, Eigen::Index p, std::mt19937_64& rng);

enum class BudgetMode {
  equality,   // sum lambda == P (N >= sum M_i)
  half_space  // sum lambda <= P (N < sum M_i)
};

/// Non-negative power split with total budget P.
class SimplexPoint {
 public:
  /// Throws ContractViolation on a negative entry or a broken budget
  /// (tolerance 1e-10 relative to max(1, P)).
  SimplexPoint(RVector lambda, double budget, BudgetMode mode = BudgetMode::equality);

  /// (P/p, ..., P/p).
  static SimplexPoint uniform(Eigen::Index p, double budget, BudgetMode mode = BudgetMode::equality);

  const RVector& lambda() const { return lambda_; }
  double budget() const { return budget_; }
  BudgetMode mode() const { return mode_; }
  Eigen::Index size() const { return lambda_.size(); }

 private:
  RVector lambda_;
  double budget_;
  BudgetMode mode_;
};

/// eta - mean(eta) * 1, the orthogonal projection onto {v : sum v = 0}.
RVector simplex_tangent_project(const RVector& eta);

/// Moves lam along v by min(tau, s_max), where s_max is the largest scale
/// keeping every coordinate non-negative (and, in half-space mode, the sum
/// within budget). The coordinate that limits the step lands exactly on 0.
SimplexPoint simplex_step(const SimplexPoint& lam, const RVector& v, double tau);

/// Feasible ascent direction for gradient g at lam: the tangent projection of
/// g restricted to the face of the simplex that g does not leave. Coordinates
/// already at zero whose projected component is negative are frozen and the
/// projection is repeated on the remaining ones.
RVector simplex_ascent_direction(const SimplexPoint& lam, const RVector& g);

}  // namespace pareto_beam
