#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace cmekit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative and absolute thresholds shared by every rank or inclusion decision.
struct Tolerance {
  double rtol;
  double atol;

  Tolerance(double rtol_, double atol_);

  /// Default pseudo-inverse cutoff: max(rows, cols) * machine epsilon.
  static Tolerance machine(Eigen::Index rows, Eigen::Index cols);

  /// Default used by the CME pipeline and the CLI (rtol 1e-10, atol 1e-12).
  static Tolerance pipeline();
};

/// Eigenvalues sorted descending; column j of `vectors` pairs with values(j).
struct SpectralDecomposition {
  Vector values;
  Matrix vectors;

  Matrix reconstruct() const;
};

struct InclusionResult {
  bool included;
  double residual;
};

void require_finite(const Matrix &m, const char *what);

/// Symmetric eigendecomposition with a reproducible basis.
///
/// Eigenvalues are returned in descending order. Ties (within a few ulps of
/// the spectral radius) are ordered by the index of the dominant component of
/// each eigenvector, and every eigenvector is signed so that its
/// largest-magnitude component is positive.
SpectralDecomposition sym_eig(const Matrix &m, const Tolerance &tol);
SpectralDecomposition sym_eig(const Matrix &m);

/// Moore-Penrose pseudo-inverse via SVD; singular values below
/// rtol * sigma_max (or below atol) are treated as zero.
Matrix pinv(const Matrix &m, const Tolerance &tol);
Matrix pinv(const Matrix &m);

/// Pseudo-inverse cutoff actually applied to `m` under `tol`.
double pinv_cutoff(double sigma_max, const Tolerance &tol);

/// ran(a) within ran(b), decided by the projection residual ||(I - b b^+) a||_F.
InclusionResult range_included(const Matrix &a, const Matrix &b, const Tolerance &tol);

/// ran(c_cross) within ran(c_range) for a cross-covariance block. The size of
/// c_cross is floored at its Cauchy-Schwarz bound sqrt(tr c_range * tr c_other),
/// so a cross block that is zero up to rounding counts as included.
InclusionResult covariance_range_included(const Matrix &c_cross, const Matrix &c_range,
                                          const Matrix &c_other, const Tolerance &tol);

/// Factor Q = b^+ a with b Q = a, ker Q = ker a and ran Q inside ran b^T.
/// Throws RangeNotIncluded when ran(a) is not inside ran(b).
Matrix douglas_factor(const Matrix &a, const Matrix &b, const Tolerance &tol);

/// Numerical rank of a matrix under the pseudo-inverse cutoff.
Eigen::Index numerical_rank(const Matrix &m, const Tolerance &tol);

/// Orthonormal basis of the null space of m (columns).
Matrix null_space(const Matrix &m, const Tolerance &tol);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix &m);

double spectral_norm(const Matrix &m);

/// Projector P = U_n U_n^T onto the span of the first n columns of `basis`.
Matrix leading_projector(const Matrix &basis, Eigen::Index n);

} // namespace cmekit
