#pragma once

#include "cmekit/discrete.hpp"
#include "cmekit/kernels.hpp"
#include "cmekit/linalg.hpp"

#include <vector>

namespace cmekit {

/// mu_{Y|X=x} = mu_Y + A (phi(x) - mu_X) with A = (C_X^+ C_XY)^T.
struct CenteredCmeOperator {
  Matrix a; // rank_y x rank_x
  Vector mu_x;
  Vector mu_y;
  double fit_residual = 0.0; // range-inclusion residual of C_XY in C_X
};

/// mu_{Y|X=x} = B phi(x) with B = (uC_X^+ uC_XY)^T.
struct UncenteredCmeOperator {
  Matrix b; // rank_y x rank_x
  double fit_residual = 0.0;
};

enum class CmeVariant { centred, uncentred };

/// Which covariance supplies the truncation eigenbasis. The uncentred
/// truncation defaults to the eigenbasis of C_X as well.
enum class TruncationBasis { centred_covariance, uncentred_covariance };

struct TruncatedCme {
  Eigen::Index n = 0;
  CmeVariant variant = CmeVariant::centred;
  TruncationBasis basis = TruncationBasis::centred_covariance;
  Matrix eigenbasis; // rank_x x n, leading eigenvectors
  Matrix a_n;        // rank_y x rank_x
  Vector mu_x;       // anchors (centred variant only)
  Vector mu_y;
  double range_residual = 0.0; // ran C_XY^(n) in ran C_X^(n)
};

struct AssumptionReport {
  bool assumption_c = false;
  double assumption_c_residual = 0.0;
  bool assumption_cuu = false;
  double assumption_cuu_residual = 0.0;
  bool characteristic = false;
  bool hc_dense = false;
  bool l2_universal = false;
  bool assumption_a = false; // every function on supp(p_X) lies in H
  bool assumption_b = false; // every centred function lies in H_C
  bool hierarchy_consistent = false;
};

AssumptionReport check_assumptions(const Moments &mo, const KernelHypothesisReport &kx,
                                   const Tolerance &tol);

/// Throws RangeInclusionViolated when C_XY does not map into ran C_X.
CenteredCmeOperator fit_centered(const Moments &mo, const Tolerance &tol);
Vector predict_centered(const CenteredCmeOperator &op, const Vector &phi_x);

UncenteredCmeOperator fit_uncentered(const Moments &mo, const Tolerance &tol);
Vector predict_uncentered(const UncenteredCmeOperator &op, const Vector &phi_x);

struct ClassicalResult {
  Vector output;
  bool cx_singular = false;
  Eigen::Index cx_rank = 0;
  bool query_in_range = false;
  double query_range_residual = 0.0;
};

/// C_YX C_X^+ phi(x), with the pseudo-inverse standing in for C_X^{-1}.
ClassicalResult classical_cme(const Moments &mo, const Vector &phi_x, const Tolerance &tol);

TruncatedCme fit_truncated(const Moments &mo, Eigen::Index n, CmeVariant variant,
                           const Tolerance &tol,
                           TruncationBasis basis = TruncationBasis::centred_covariance);
Vector predict_truncated(const TruncatedCme &op, const Vector &phi_x);

/// Predictions at every base point, one column per x label.
Matrix predict_all(const CenteredCmeOperator &op, const FeatureBasis &hx);
Matrix predict_all(const UncenteredCmeOperator &op, const FeatureBasis &hx);
Matrix predict_all(const TruncatedCme &op, const FeatureBasis &hx);

/// sum_x p_X(x) ||prediction(x) - mu_{Y|X=x}||^2 over on-support x.
double weighted_squared_error(const Moments &mo, const ConditionalOracle &oracle,
                              const Matrix &predictions);

/// max over on-support x of mmd(prediction(x), mu_{Y|X=x}).
double max_pointwise_error(const ConditionalOracle &oracle, const Matrix &predictions);

struct SweepPoint {
  Eigen::Index n = 0;
  double error = 0.0;
  double range_residual = 0.0;
};

/// e(n) for n = 1 .. rank_x.
std::vector<SweepPoint> truncation_sweep(const Moments &mo, const ConditionalOracle &oracle,
                                         CmeVariant variant, const Tolerance &tol,
                                         TruncationBasis basis = TruncationBasis::centred_covariance);

/// max over feature-basis h and labels y of
/// |<h, mu_{Y|X=.}(y) - prediction(.)(y)>_{L2(p_X)}|.
double weak_identity_check(const Moments &mo, const ConditionalOracle &oracle,
                           const Matrix &predictions);

/// ||mu_Y - B mu_X||_G.
double marginal_consistency(const UncenteredCmeOperator &op, const Moments &mo);
double marginal_consistency(const TruncatedCme &op, const Moments &mo);

} // namespace cmekit
