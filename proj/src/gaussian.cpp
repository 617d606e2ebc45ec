#include "cmekit/gaussian.hpp"

#include "cmekit/cme.hpp"
#include "cmekit/error.hpp"

#include <algorithm>
#include <string>

namespace cmekit {

Matrix GaussianJoint::block() const {
  const Eigen::Index du = dim_u();
  const Eigen::Index dv = dim_v();
  Matrix c(du + dv, du + dv);
  c.topLeftCorner(du, du) = c_u;
  c.topRightCorner(du, dv) = c_uv;
  c.bottomLeftCorner(dv, du) = c_vu;
  c.bottomRightCorner(dv, dv) = c_v;
  return c;
}

double GaussianJoint::block_min_eigenvalue() const { return min_eigenvalue(block()); }

void GaussianJoint::validate(double psd_slack) const {
  const Eigen::Index du = dim_u();
  const Eigen::Index dv = dim_v();
  if (c_u.cols() != du || c_v.cols() != dv || c_uv.rows() != du || c_uv.cols() != dv ||
      c_vu.rows() != dv || c_vu.cols() != du || mu_u.size() != du || mu_v.size() != dv) {
    throw DimensionMismatch("gaussian joint: block dimensions are inconsistent");
  }
  if ((c_uv - c_vu.transpose()).norm() > 1e-12 * std::max(1.0, c_uv.norm())) {
    throw NotPsd("gaussian joint: C_UV is not the transpose of C_VU");
  }
  const Matrix c = block();
  require_finite(c, "gaussian joint");
  if (min_eigenvalue(c) < -psd_slack * std::max(1.0, spectral_norm(c))) {
    throw NotPsd("gaussian joint: block covariance is not positive semi-definite");
  }
}

Matrix ObliqueProjection::full() const {
  const Eigen::Index dv = q_hat.rows();
  const Eigen::Index du = q_hat.cols();
  Matrix q = Matrix::Zero(du + dv, du + dv);
  q.bottomLeftCorner(dv, du) = q_hat;
  q.bottomRightCorner(dv, dv) = Matrix::Identity(dv, dv);
  return q;
}

double ObliqueResiduals::max() const {
  return std::max({idempotence, range, c_symmetry, factorization, kernel, range_in_cv});
}

InclusionResult is_compatible(const GaussianJoint &joint, const Tolerance &tol) {
  return covariance_range_included(joint.c_vu, joint.c_v, joint.c_u, tol);
}

ObliqueProjection oblique_projection(const GaussianJoint &joint, const Tolerance &tol) {
  const InclusionResult inc = is_compatible(joint, tol);
  if (!inc.included) {
    throw Incompatible("oblique_projection: ran C_VU not inside ran C_V (residual " +
                       std::to_string(inc.residual) + ")");
  }
  return {pinv(joint.c_v, tol) * joint.c_vu};
}

ObliqueResiduals projection_residuals(const GaussianJoint &joint, const ObliqueProjection &proj,
                                      const Tolerance &tol) {
  ObliqueResiduals r;
  const Matrix q = proj.full();
  const Matrix c = joint.block();
  const Eigen::Index du = joint.dim_u();
  const Eigen::Index dv = joint.dim_v();
  r.idempotence = (q * q - q).norm();
  // ran Q = H: the G rows vanish and the H block has full row rank dv
  const double g_rows = q.topRows(du).norm();
  const Eigen::Index h_rank = numerical_rank(q.bottomRows(dv), tol);
  r.range = g_rows + static_cast<double>(dv - h_rank);
  r.c_symmetry = (c * q - q.transpose() * c).norm();
  r.factorization = (joint.c_v * proj.q_hat - joint.c_vu).norm();
  const Matrix ker_cvu = null_space(joint.c_vu, tol);
  const Matrix ker_q = null_space(proj.q_hat, tol);
  double k = 0.0;
  if (ker_cvu.cols() > 0) k = std::max(k, (proj.q_hat * ker_cvu).norm());
  if (ker_q.cols() > 0) k = std::max(k, (joint.c_vu * ker_q).norm());
  k = std::max(k, static_cast<double>(std::abs(ker_cvu.cols() - ker_q.cols())));
  r.kernel = k;
  r.range_in_cv = (proj.q_hat - joint.c_v * pinv(joint.c_v, tol) * proj.q_hat).norm();
  return r;
}

GaussianConditional condition(const GaussianJoint &joint, const Vector &v, const Tolerance &tol) {
  if (v.size() != joint.dim_v()) throw DimensionMismatch("condition: v is not an H-vector");
  const ObliqueProjection proj = oblique_projection(joint, tol);
  GaussianConditional out;
  out.mean = joint.mu_u + proj.q_hat.transpose() * (v - joint.mu_v);
  const Matrix cov = joint.c_u - joint.c_uv * proj.q_hat;
  out.cov = 0.5 * (cov + cov.transpose());
  return out;
}

GaussianConditional condition_truncated(const GaussianJoint &joint, const Matrix &eigenbasis,
                                        Eigen::Index n, const Vector &v, const Tolerance &tol) {
  const Eigen::Index dv = joint.dim_v();
  if (n < 1 || n > dv) {
    throw RankOutOfBounds("condition_truncated: n = " + std::to_string(n) + " outside [1, " +
                          std::to_string(dv) + "]");
  }
  if (eigenbasis.rows() != dv || eigenbasis.cols() < n) {
    throw DimensionMismatch("condition_truncated: eigenbasis does not span H");
  }
  if (v.size() != dv) throw DimensionMismatch("condition_truncated: v is not an H-vector");
  const Matrix proj = leading_projector(eigenbasis, n);
  GaussianJoint truncated = joint;
  truncated.c_v = proj * joint.c_v * proj;
  truncated.c_vu = proj * joint.c_vu;
  truncated.c_uv = truncated.c_vu.transpose();
  return condition(truncated, v, tol);
}

GaussianConditional condition_truncated(const GaussianJoint &joint, Eigen::Index n,
                                        const Vector &v, const Tolerance &tol) {
  const SpectralDecomposition eig = sym_eig(joint.c_v, tol);
  return condition_truncated(joint, eig.vectors, n, v, tol);
}

GaussianJoint bridge_from_moments(const Moments &mo) {
  GaussianJoint g;
  g.mu_u = mo.mu_y;
  g.mu_v = mo.mu_x;
  g.c_u = mo.c_y;
  g.c_uv = mo.c_yx();
  g.c_vu = mo.c_xy;
  g.c_v = mo.c_x;
  return g;
}

BridgeReport verify_bridge(const FiniteJoint &joint, const Moments &mo, const Tolerance &tol) {
  BridgeReport r;
  const GaussianJoint g = bridge_from_moments(mo);
  const ConditionalOracle oracle = build_oracle(joint, mo.gy);

  const InclusionResult compat = is_compatible(g, tol);
  r.compatible = compat.included;
  r.compatibility_residual = compat.residual;
  const InclusionResult c = covariance_range_included(mo.c_xy, mo.c_x, mo.c_y, tol);
  r.assumption_c = c.included;
  r.assumption_c_residual = c.residual;
  r.flags_agree = r.compatible == r.assumption_c;

  const SpectralDecomposition eig = sym_eig(g.c_v, tol);
  r.used_truncation = !r.compatible;
  Matrix cov;
  for (Eigen::Index x = 0; x < joint.m(); ++x) {
    const Vector v = mo.hx.coords.col(x);
    const GaussianConditional cond =
        r.compatible ? condition(g, v, tol) : condition_truncated(g, eig.vectors, g.dim_v(), v, tol);
    if (cov.size() == 0) cov = cond.cov;
    if (!oracle.on_support[static_cast<std::size_t>(x)]) continue;
    r.mean_error = std::max(r.mean_error, mmd(cond.mean, oracle.means.col(x)));
  }
  if (cov.size() == 0) cov = g.c_u;
  r.cov_error = (cov - oracle.expected_cov).norm();
  return r;
}

IncompatibleExample incompatible_example(Eigen::Index n, const Tolerance &tol) {
  if (n < 1) throw RankOutOfBounds("incompatible_example: n must be >= 1");
  Vector cu(n), cv(n), cvu(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double j = static_cast<double>(i + 1);
    cu(i) = 1.0 / (j * j);
    cv(i) = 1.0 / (j * j * j * j);
    cvu(i) = 1.0 / (j * j * j);
  }
  IncompatibleExample ex;
  ex.joint.mu_u = Vector::Zero(n);
  ex.joint.mu_v = Vector::Zero(n);
  ex.joint.c_u = cu.asDiagonal();
  ex.joint.c_v = cv.asDiagonal();
  ex.joint.c_vu = cvu.asDiagonal();
  ex.joint.c_uv = ex.joint.c_vu.transpose();
  const ObliqueProjection proj = oblique_projection(ex.joint, tol);
  ex.q_hat_norm = spectral_norm(proj.q_hat);
  ex.min_sv_cv = cv.minCoeff();
  ex.min_sv_cvu = cvu.minCoeff();
  ex.sv_ratio = ex.min_sv_cv / ex.min_sv_cvu;
  ex.block_min_eigenvalue = ex.joint.block_min_eigenvalue();
  return ex;
}

GaussianJoint synthetic_incompatible_block() {
  GaussianJoint g;
  g.mu_u = Vector::Zero(1);
  g.mu_v = Vector::Zero(2);
  g.c_u = Matrix::Identity(1, 1);
  g.c_v = Matrix::Zero(2, 2);
  g.c_v(0, 0) = 1.0;
  g.c_vu = Matrix::Zero(2, 1);
  g.c_vu(1, 0) = 1.0;
  g.c_uv = g.c_vu.transpose();
  return g;
}

} // namespace cmekit
