#include "cmekit/cme.hpp"

#include "cmekit/error.hpp"

#include <string>

namespace cmekit {

namespace {

void require_query(const Vector &phi_x, Eigen::Index rank_x) {
  if (phi_x.size() != rank_x) {
    throw DimensionMismatch("query has " + std::to_string(phi_x.size()) +
                            " coordinates, H has rank " + std::to_string(rank_x));
  }
}

} // namespace

AssumptionReport check_assumptions(const Moments &mo, const KernelHypothesisReport &kx,
                                   const Tolerance &tol) {
  AssumptionReport r;
  const InclusionResult c = covariance_range_included(mo.c_xy, mo.c_x, mo.c_y, tol);
  const InclusionResult cuu = covariance_range_included(mo.uc_xy, mo.uc_x, mo.uc_y, tol);
  r.assumption_c = c.included;
  r.assumption_c_residual = c.residual;
  r.assumption_cuu = cuu.included;
  r.assumption_cuu_residual = cuu.residual;
  r.characteristic = kx.characteristic;
  r.hc_dense = kx.hc_dense;
  r.l2_universal = kx.l2_universal;
  r.assumption_a = kx.h_dense;
  r.assumption_b = kx.hc_dense;

  bool ok = kx.consistent();
  if (r.assumption_a && !r.assumption_b) ok = false;
  if (r.assumption_b && !r.assumption_c) ok = false;
  if (r.assumption_a && !r.assumption_cuu) ok = false;
  r.hierarchy_consistent = ok;
  return r;
}

CenteredCmeOperator fit_centered(const Moments &mo, const Tolerance &tol) {
  const InclusionResult inc = covariance_range_included(mo.c_xy, mo.c_x, mo.c_y, tol);
  if (!inc.included) {
    throw RangeInclusionViolated("fit_centered: ran C_XY not inside ran C_X (residual " +
                                 std::to_string(inc.residual) + "); use the truncated fit");
  }
  CenteredCmeOperator op;
  op.a = (pinv(mo.c_x, tol) * mo.c_xy).transpose();
  op.mu_x = mo.mu_x;
  op.mu_y = mo.mu_y;
  op.fit_residual = inc.residual;
  return op;
}

Vector predict_centered(const CenteredCmeOperator &op, const Vector &phi_x) {
  require_query(phi_x, op.a.cols());
  return op.mu_y + op.a * (phi_x - op.mu_x);
}

UncenteredCmeOperator fit_uncentered(const Moments &mo, const Tolerance &tol) {
  const InclusionResult inc = covariance_range_included(mo.uc_xy, mo.uc_x, mo.uc_y, tol);
  if (!inc.included) {
    throw RangeInclusionViolated("fit_uncentered: ran uC_XY not inside ran uC_X (residual " +
                                 std::to_string(inc.residual) + ")");
  }
  UncenteredCmeOperator op;
  op.b = (pinv(mo.uc_x, tol) * mo.uc_xy).transpose();
  op.fit_residual = inc.residual;
  return op;
}

Vector predict_uncentered(const UncenteredCmeOperator &op, const Vector &phi_x) {
  require_query(phi_x, op.b.cols());
  return op.b * phi_x;
}

ClassicalResult classical_cme(const Moments &mo, const Vector &phi_x, const Tolerance &tol) {
  require_query(phi_x, mo.c_x.rows());
  ClassicalResult r;
  r.output = mo.c_yx() * (pinv(mo.c_x, tol) * phi_x);
  r.cx_rank = numerical_rank(mo.c_x, tol);
  r.cx_singular = r.cx_rank < mo.c_x.rows();
  const InclusionResult inc = range_included(Matrix(phi_x), mo.c_x, tol);
  r.query_in_range = inc.included;
  r.query_range_residual = inc.residual;
  return r;
}

TruncatedCme fit_truncated(const Moments &mo, Eigen::Index n, CmeVariant variant,
                           const Tolerance &tol, TruncationBasis basis) {
  const Eigen::Index rank = mo.hx.rank;
  if (n < 1 || n > rank) {
    throw RankOutOfBounds("truncation rank " + std::to_string(n) + " outside [1, " +
                          std::to_string(rank) + "]");
  }
  const Matrix &eig_source =
      basis == TruncationBasis::centred_covariance ? mo.c_x : mo.uc_x;
  const SpectralDecomposition eig = sym_eig(eig_source, tol);

  TruncatedCme op;
  op.n = n;
  op.variant = variant;
  op.basis = basis;
  op.eigenbasis = eig.vectors.leftCols(n);
  const Matrix proj = op.eigenbasis * op.eigenbasis.transpose();

  const Matrix &cov = variant == CmeVariant::centred ? mo.c_x : mo.uc_x;
  const Matrix &cross = variant == CmeVariant::centred ? mo.c_xy : mo.uc_xy;
  const Matrix cov_n = proj * cov * proj;
  const Matrix cross_n = proj * cross;
  op.range_residual = range_included(cross_n, cov_n, tol).residual;
  op.a_n = (pinv(cov_n, tol) * cross_n).transpose();
  if (variant == CmeVariant::centred) {
    op.mu_x = mo.mu_x;
    op.mu_y = mo.mu_y;
  }
  return op;
}

Vector predict_truncated(const TruncatedCme &op, const Vector &phi_x) {
  require_query(phi_x, op.a_n.cols());
  if (op.variant == CmeVariant::centred) return op.mu_y + op.a_n * (phi_x - op.mu_x);
  return op.a_n * phi_x;
}

Matrix predict_all(const CenteredCmeOperator &op, const FeatureBasis &hx) {
  return (op.a * (hx.coords.colwise() - op.mu_x)).colwise() + op.mu_y;
}

Matrix predict_all(const UncenteredCmeOperator &op, const FeatureBasis &hx) {
  return op.b * hx.coords;
}

Matrix predict_all(const TruncatedCme &op, const FeatureBasis &hx) {
  if (op.variant == CmeVariant::centred) {
    return (op.a_n * (hx.coords.colwise() - op.mu_x)).colwise() + op.mu_y;
  }
  return op.a_n * hx.coords;
}

double weighted_squared_error(const Moments &mo, const ConditionalOracle &oracle,
                              const Matrix &predictions) {
  double e = 0.0;
  for (Eigen::Index x = 0; x < predictions.cols(); ++x) {
    if (!oracle.on_support[static_cast<std::size_t>(x)]) continue;
    e += mo.px(x) * (predictions.col(x) - oracle.means.col(x)).squaredNorm();
  }
  return e;
}

double max_pointwise_error(const ConditionalOracle &oracle, const Matrix &predictions) {
  double worst = 0.0;
  for (Eigen::Index x = 0; x < predictions.cols(); ++x) {
    if (!oracle.on_support[static_cast<std::size_t>(x)]) continue;
    worst = std::max(worst, mmd(predictions.col(x), oracle.means.col(x)));
  }
  return worst;
}

std::vector<SweepPoint> truncation_sweep(const Moments &mo, const ConditionalOracle &oracle,
                                         CmeVariant variant, const Tolerance &tol,
                                         TruncationBasis basis) {
  const Eigen::Index rank = mo.hx.rank;
  std::vector<SweepPoint> out(static_cast<std::size_t>(rank));
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index n = 1; n <= rank; ++n) {
    const TruncatedCme op = fit_truncated(mo, n, variant, tol, basis);
    const Matrix pred = predict_all(op, mo.hx);
    out[static_cast<std::size_t>(n - 1)] = {n, weighted_squared_error(mo, oracle, pred),
                                            op.range_residual};
  }
  return out;
}

double weak_identity_check(const Moments &mo, const ConditionalOracle &oracle,
                           const Matrix &predictions) {
  // diff(:, x) = mu_{Y|X=x} - prediction(x); only on-support x carry weight
  Matrix diff = Matrix::Zero(predictions.rows(), predictions.cols());
  for (Eigen::Index x = 0; x < predictions.cols(); ++x) {
    if (oracle.on_support[static_cast<std::size_t>(x)]) {
      diff.col(x) = oracle.means.col(x) - predictions.col(x);
    }
  }
  // residual(i, k) = sum_x p_X(x) h_i(x) (diff(x))(y_k)
  const Matrix values_y = mo.gy.coords.transpose() * diff; // q x m, value at y_k
  const Matrix residual = mo.hx.coords * mo.px.asDiagonal() * values_y.transpose();
  return residual.size() ? residual.cwiseAbs().maxCoeff() : 0.0;
}

double marginal_consistency(const UncenteredCmeOperator &op, const Moments &mo) {
  return (mo.mu_y - op.b * mo.mu_x).norm();
}

double marginal_consistency(const TruncatedCme &op, const Moments &mo) {
  return (mo.mu_y - predict_truncated(op, mo.mu_x)).norm();
}

} // namespace cmekit
