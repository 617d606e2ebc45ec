#pragma once

#include "cmekit/discrete.hpp"
#include "cmekit/linalg.hpp"

namespace cmekit {

/// Jointly Gaussian (U, V) on G + H, blocks ordered U first.
struct GaussianJoint {
  Vector mu_u;
  Vector mu_v;
  Matrix c_u;
  Matrix c_uv; // G <- H
  Matrix c_vu; // H <- G
  Matrix c_v;

  Eigen::Index dim_u() const { return c_u.rows(); }
  Eigen::Index dim_v() const { return c_v.rows(); }
  Matrix block() const;
  double block_min_eigenvalue() const;
  /// Throws DimensionMismatch or NotPsd.
  void validate(double psd_slack = 1e-10) const;
};

/// The block Q-hat: G -> H of the oblique projection Q = [[0, 0], [Q-hat, I]].
struct ObliqueProjection {
  Matrix q_hat;

  Matrix full() const;
};

struct ObliqueResiduals {
  double idempotence = 0.0;  // ||Q^2 - Q||
  double range = 0.0;        // G-block rows of Q plus rank defect of its H block
  double c_symmetry = 0.0;   // ||C Q - Q^T C||
  double factorization = 0.0; // ||C_V Q-hat - C_VU||
  double kernel = 0.0;        // ker Q-hat versus ker C_VU, both directions
  double range_in_cv = 0.0;   // ||(I - C_V C_V^+) Q-hat||

  double max() const;
};

struct GaussianConditional {
  Vector mean;
  Matrix cov;
};

/// ran C_VU inside ran C_V.
InclusionResult is_compatible(const GaussianJoint &joint, const Tolerance &tol);

/// Q-hat = C_V^+ C_VU; throws Incompatible.
ObliqueProjection oblique_projection(const GaussianJoint &joint, const Tolerance &tol);

ObliqueResiduals projection_residuals(const GaussianJoint &joint, const ObliqueProjection &proj,
                                      const Tolerance &tol);

/// mean = mu_U + Q-hat^T (v - mu_V), cov = C_U - C_UV Q-hat; throws Incompatible.
GaussianConditional condition(const GaussianJoint &joint, const Vector &v, const Tolerance &tol);

/// Conditioning of P^(n) C P^(n), where P^(n) keeps G and the first n
/// columns of `eigenbasis` (an orthonormal basis of H).
GaussianConditional condition_truncated(const GaussianJoint &joint, const Matrix &eigenbasis,
                                        Eigen::Index n, const Vector &v, const Tolerance &tol);

/// Same, using the eigenvectors of C_V in descending order.
GaussianConditional condition_truncated(const GaussianJoint &joint, Eigen::Index n,
                                        const Vector &v, const Tolerance &tol);

/// (mu_U, mu_V, C_U, C_UV, C_VU, C_V) := (mu_Y, mu_X, C_Y, C_YX, C_XY, C_X).
GaussianJoint bridge_from_moments(const Moments &mo);

struct BridgeReport {
  double mean_error = 0.0; // max over on-support x of mmd(conditional mean, oracle)
  double cov_error = 0.0;  // ||C_{U|V} - E[C_{Y|X}]||_F
  bool compatible = false;
  double compatibility_residual = 0.0;
  bool assumption_c = false;
  double assumption_c_residual = 0.0;
  bool flags_agree = false;
  bool used_truncation = false;

  bool passes(double tolerance) const {
    return mean_error <= tolerance && cov_error <= tolerance && flags_agree;
  }
};

BridgeReport verify_bridge(const FiniteJoint &joint, const Moments &mo, const Tolerance &tol);

struct IncompatibleExample {
  GaussianJoint joint;
  double q_hat_norm = 0.0;
  double min_sv_cv = 0.0;
  double min_sv_cvu = 0.0;
  double sv_ratio = 0.0; // min_sv_cv / min_sv_cvu, -> 0 as n grows
  double block_min_eigenvalue = 0.0;
};

/// Rank-n truncation of the diagonal family C_U = j^-2, C_V = j^-4,
/// C_UV = C_VU = j^-3 whose infinite version admits no oblique projection.
IncompatibleExample incompatible_example(Eigen::Index n, const Tolerance &tol);

/// C_U = 1, C_V = diag(1, 0), C_VU = (0, 1)^T: ran C_VU leaves ran C_V.
/// A PSD block is always compatible in finite dimensions, so this block is
/// indefinite and fails validate().
GaussianJoint synthetic_incompatible_block();

} // namespace cmekit
