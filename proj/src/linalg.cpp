#include "cmekit/linalg.hpp"

#include "cmekit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace cmekit {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Eigen::Index dominant_index(const Eigen::Ref<const Vector> &v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    // strict comparison keeps the first index among equal magnitudes
    if (std::abs(v(i)) > std::abs(v(best)) + 8 * kEps) best = i;
  }
  return best;
}

Eigen::JacobiSVD<Matrix> full_svd(const Matrix &m) {
  return Eigen::JacobiSVD<Matrix>(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
}

} // namespace

Tolerance::Tolerance(double rtol_, double atol_) : rtol(rtol_), atol(atol_) {
  if (!(rtol >= 0.0) || !(atol >= 0.0) || !std::isfinite(rtol) || !std::isfinite(atol)) {
    throw InvalidSpec("tolerance thresholds must be finite and non-negative");
  }
}

Tolerance Tolerance::machine(Eigen::Index rows, Eigen::Index cols) {
  const double dim = static_cast<double>(std::max<Eigen::Index>({rows, cols, 1}));
  return {dim * kEps, 1e-12};
}

Tolerance Tolerance::pipeline() { return {1e-10, 1e-12}; }

Matrix SpectralDecomposition::reconstruct() const {
  return vectors * values.asDiagonal() * vectors.transpose();
}

void require_finite(const Matrix &m, const char *what) {
  if (!m.allFinite()) {
    throw NonFinite(std::string(what) + ": matrix contains NaN or Inf");
  }
}

SpectralDecomposition sym_eig(const Matrix &m, const Tolerance &tol) {
  require_finite(m, "sym_eig");
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("sym_eig: matrix must be square");
  }
  const double asym = (m - m.transpose()).norm();
  if (asym > tol.atol) {
    throw NonSymmetric("sym_eig: ||M - M^T||_F = " + std::to_string(asym) +
                       " exceeds atol");
  }
  const Eigen::Index n = m.rows();
  SpectralDecomposition out;
  if (n == 0) {
    out.values = Vector(0);
    out.vectors = Matrix(0, 0);
    return out;
  }

  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  const Vector &vals = solver.eigenvalues();
  Matrix vecs = solver.eigenvectors();

  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index k = dominant_index(vecs.col(j));
    if (vecs(k, j) < 0.0) vecs.col(j) = -vecs.col(j);
  }

  const double scale = std::max(vals.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  const double tie = 64.0 * kEps * scale * static_cast<double>(n);
  // Eigen returns ascending values; walk them descending and reorder each run
  // of near-equal values by dominant component.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) order[static_cast<std::size_t>(j)] = n - 1 - j;
  const auto by_dominant = [&](Eigen::Index a, Eigen::Index b) {
    return dominant_index(vecs.col(a)) < dominant_index(vecs.col(b));
  };
  for (auto first = order.begin(); first != order.end();) {
    auto last = first + 1;
    while (last != order.end() && vals(*(last - 1)) - vals(*last) <= tie) ++last;
    std::stable_sort(first, last, by_dominant);
    first = last;
  }

  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    out.values(j) = vals(src);
    out.vectors.col(j) = vecs.col(src);
  }
  return out;
}

SpectralDecomposition sym_eig(const Matrix &m) {
  return sym_eig(m, Tolerance::machine(m.rows(), m.cols()));
}

double pinv_cutoff(double sigma_max, const Tolerance &tol) { return tol.rtol * sigma_max; }

Matrix pinv(const Matrix &m, const Tolerance &tol) {
  require_finite(m, "pinv");
  if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  const auto svd = full_svd(m);
  const Vector &s = svd.singularValues();
  const double cutoff = pinv_cutoff(s.size() > 0 ? s(0) : 0.0, tol);
  Vector inv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) inv(i) = 1.0 / s(i);
  }
  const Eigen::Index k = s.size();
  return svd.matrixV().leftCols(k) * inv.asDiagonal() * svd.matrixU().leftCols(k).transpose();
}

Matrix pinv(const Matrix &m) { return pinv(m, Tolerance::machine(m.rows(), m.cols())); }

Eigen::Index numerical_rank(const Matrix &m, const Tolerance &tol) {
  require_finite(m, "numerical_rank");
  if (m.size() == 0) return 0;
  const Vector s = full_svd(m).singularValues();
  const double cutoff = pinv_cutoff(s(0), tol);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) ++r;
  }
  return r;
}

Matrix null_space(const Matrix &m, const Tolerance &tol) {
  require_finite(m, "null_space");
  if (m.cols() == 0) return Matrix(0, 0);
  if (m.rows() == 0) return Matrix::Identity(m.cols(), m.cols());
  const auto svd = full_svd(m);
  const Eigen::Index r = numerical_rank(m, tol);
  return svd.matrixV().rightCols(m.cols() - r);
}

InclusionResult range_included(const Matrix &a, const Matrix &b, const Tolerance &tol) {
  require_finite(a, "range_included");
  require_finite(b, "range_included");
  if (a.rows() != b.rows()) {
    throw DimensionMismatch("range_included: row counts differ");
  }
  const Matrix proj = b * pinv(b, tol);
  const double residual = (a - proj * a).norm();
  const double bound = tol.rtol * std::max(a.norm(), tol.atol);
  return {residual <= bound, residual};
}

InclusionResult covariance_range_included(const Matrix &c_cross, const Matrix &c_range,
                                          const Matrix &c_other, const Tolerance &tol) {
  const double scale = std::sqrt(std::max(0.0, c_range.trace()) * std::max(0.0, c_other.trace()));
  return range_included(c_cross, c_range, Tolerance(tol.rtol, std::max(tol.atol, scale)));
}

Matrix douglas_factor(const Matrix &a, const Matrix &b, const Tolerance &tol) {
  const InclusionResult inc = range_included(a, b, tol);
  if (!inc.included) {
    throw RangeNotIncluded("douglas_factor: ran(A) not inside ran(B), residual " +
                           std::to_string(inc.residual));
  }
  return pinv(b, tol) * a;
}

double min_eigenvalue(const Matrix &m) {
  require_finite(m, "min_eigenvalue");
  if (m.size() == 0) return 0.0;
  const Matrix sym = 0.5 * (m + m.transpose());
  return Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

double spectral_norm(const Matrix &m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

Matrix leading_projector(const Matrix &basis, Eigen::Index n) {
  const Matrix u = basis.leftCols(n);
  return u * u.transpose();
}

} // namespace cmekit
