#pragma once

#include "cmekit/kernels.hpp"
#include "cmekit/linalg.hpp"

#include <string>
#include <vector>

namespace cmekit {

/// A label of a finite base set together with the real vector the kernels see.
struct Label {
  std::string name;
  Vector embedding;
};

/// Labels named "0", "1", ... with scalar embeddings 0, 1, ...
std::vector<Label> index_labels(Eigen::Index count);

/// Probability table over X x Y. Construction validates every invariant.
class FiniteJoint {
public:
  FiniteJoint(std::vector<Label> x_labels, std::vector<Label> y_labels, Matrix p);

  Eigen::Index m() const { return p_.rows(); }
  Eigen::Index q() const { return p_.cols(); }
  const Matrix &p() const { return p_; }
  const std::vector<Label> &x_labels() const { return x_; }
  const std::vector<Label> &y_labels() const { return y_; }
  Vector px() const { return p_.rowwise().sum(); }
  Vector py() const { return p_.colwise().sum().transpose(); }
  bool on_support(Eigen::Index x) const { return px()(x) > 0.0; }

  /// Embeddings as columns of a d x m (resp. d x q) matrix.
  PointSet x_points() const;
  PointSet y_points() const;

private:
  std::vector<Label> x_;
  std::vector<Label> y_;
  Matrix p_;
};

/// Mean embeddings and (cross-)covariances in feature coordinates. Cross
/// blocks are stored H <- G, i.e. c_xy has rank_x rows and rank_y columns.
struct Moments {
  FeatureBasis hx;
  FeatureBasis gy;
  Matrix joint; // m x q probability table the moments were taken under
  Vector px;
  Vector py;

  Vector mu_x;
  Vector mu_y;
  Matrix c_x, c_y, c_xy;
  Matrix uc_x, uc_y, uc_xy;

  Matrix c_yx() const { return c_xy.transpose(); }
  Matrix uc_yx() const { return uc_xy.transpose(); }
  /// Block operator [[C_Y, C_YX], [C_XY, C_X]] on G + H.
  Matrix block() const;
  Matrix uncentred_block() const;
};

/// Moments of an arbitrary probability table (population or empirical).
Moments moments_from_table(const Matrix &p, const FeatureBasis &hx, const FeatureBasis &gy);

Moments embed_moments(const FiniteJoint &joint, const FeatureBasis &hx, const FeatureBasis &gy);

/// Brute-force conditioning of the table; the ground truth for all CMEs.
struct ConditionalOracle {
  Matrix table;                 // m x q, row x is P(. | x); zero rows off support
  std::vector<bool> on_support; // p_X(x) > 0
  Matrix means;                 // rank_y x m, column x is mu_{Y|X=x}
  std::vector<Matrix> covs;     // C_{Y|X=x}
  Matrix expected_cov;          // E[C_{Y|X}] = sum_x p_X(x) C_{Y|X=x}
};

/// Table part only; `means`, `covs` and `expected_cov` stay empty.
ConditionalOracle conditional_table(const FiniteJoint &joint);

/// Column x is mu_{Y|X=x}; zero for off-support x.
Matrix oracle_cme(const FiniteJoint &joint, const FeatureBasis &gy);

struct ConditionalCovariances {
  std::vector<Matrix> per_x;
  Matrix expected;
};

ConditionalCovariances oracle_conditional_cov(const FiniteJoint &joint, const FeatureBasis &gy);

/// Table, means and covariances in one pass.
ConditionalOracle build_oracle(const FiniteJoint &joint, const FeatureBasis &gy);

/// f_g(x) = <g, mu_{Y|X=x}>_G on the support and 0 elsewhere.
Vector f_g(const FiniteJoint &joint, const FeatureBasis &gy, const Vector &g);

/// RKHS distance between two embedded elements given in the same basis.
double mmd(const Vector &a, const Vector &b);

/// H-coordinates of the constant function 1 on supp(p), from Gram * alpha = 1.
Vector constant_function_coordinates(const Matrix &gram_matrix, const FeatureBasis &hx,
                                     const Vector &p, const Tolerance &tol);

/// Covariance Cov_p[a(X), b(X)] of two function tables.
double weighted_cov(const Vector &a, const Vector &b, const Vector &p);

} // namespace cmekit
