// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pareto_beam {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Invalid problem dimensions, powers, weights or experiment settings.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke an operation's precondition (non-orthonormal frame,
/// mismatched tangent base points, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The converged point carries no usable stream (all power below threshold).
class DegenerateSolution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No feasible point exists for the requested construction.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Broken internal numerical invariant (e.g. a noise-plus-interference
/// matrix that fails Cholesky).
class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kNatsToBits = 1.4426950408889634;  // 1 / ln 2

inline double to_bits(double nats) { return nats * kNatsToBits; }

/// Largest absolute entry of A^H A - I.
inline double orthonormality_error(const CMatrix& a) {
  if (a.cols() == 0) return 0.0;
  return (a.adjoint() * a - CMatrix::Identity(a.cols(), a.cols())).cwiseAbs().maxCoeff();
}

}  // namespace pareto_beam
