#pragma once

#include "cmekit/linalg.hpp"

#include <string>
#include <variant>
#include <vector>

namespace cmekit {

/// Points live in the columns of a d x m matrix.
using PointSet = Matrix;

struct GaussianKernel {
  double lengthscale = 1.0;
};
struct LaplacianKernel {
  double lengthscale = 1.0;
};
struct PolynomialKernel {
  int degree = 2;
  double offset = 1.0;
};
struct LinearKernel {};
struct DeltaKernel {};

/// A positive semi-definite kernel on real vectors.
class Kernel {
public:
  using Variant =
      std::variant<GaussianKernel, LaplacianKernel, PolynomialKernel, LinearKernel, DeltaKernel>;

  Kernel(Variant v); // NOLINT(google-explicit-constructor)

  static Kernel gaussian(double lengthscale);
  static Kernel laplacian(double lengthscale);
  static Kernel polynomial(int degree, double offset);
  static Kernel linear();
  static Kernel delta();

  double operator()(const Eigen::Ref<const Vector> &a, const Eigen::Ref<const Vector> &b) const;

  const Variant &variant() const { return v_; }
  std::string name() const;

private:
  Variant v_;
};

/// Gram matrix k(x_i, x_j) over the columns of `points`. Throws NotPsd when
/// the result is indefinite beyond 1e-10 * sigma_max.
Matrix gram(const Kernel &k, const PointSet &points);

/// Cross Gram k(a_i, b_j).
Matrix cross_gram(const Kernel &k, const PointSet &a, const PointSet &b);

/// Explicit coordinates of the canonical feature vectors in an orthonormal
/// basis of their span. Column j of `coords` is phi(x_j); coords^T coords
/// reproduces the Gram matrix.
struct FeatureBasis {
  Eigen::Index rank = 0;
  Matrix coords;        // rank x m
  Matrix eigenvectors;  // m x rank, the Gram eigenvectors kept
  Vector eigenvalues;   // rank kept Gram eigenvalues

  Eigen::Index points() const { return coords.cols(); }
  Vector feature(Eigen::Index j) const { return coords.col(j); }
  /// Function values h(x_j) = <h, phi(x_j)> of the element with coordinates h.
  Vector evaluate(const Vector &h) const { return coords.transpose() * h; }
};

FeatureBasis feature_coordinates(const Matrix &gram_matrix, const Tolerance &tol);

/// Result of a finite-set hypothesis check with its numerical evidence.
struct HypothesisCheck {
  bool holds = false;
  double evidence = 0.0; // smallest relevant singular value / residual
  Eigen::Index deficiency = 0;
  Vector witness; // direction violating the property, empty when it holds
};

/// The kernel mean embedding separates probability vectors on the base set:
/// ker(G) meets the zero-sum hyperplane only at 0.
HypothesisCheck is_characteristic_finite(const Matrix &gram_matrix, const Tolerance &tol);

/// The Gram restricted to supp(p) is nonsingular, so H spans all functions
/// on the support.
HypothesisCheck is_l2_universal_finite(const Matrix &gram_matrix, const Vector &p,
                                       const Tolerance &tol);

/// The p-centred span of H restricted to supp(p) has dimension |supp p| - 1.
HypothesisCheck hc_dense_finite(const Matrix &gram_matrix, const Vector &p, const Tolerance &tol);

struct KernelHypothesisReport {
  bool characteristic = false;
  bool l2_universal = false; // dense in L2(Q) for every Q on the base set
  bool h_dense = false;      // dense in L2(p), i.e. universal on supp(p)
  bool hc_dense = false;
  HypothesisCheck characteristic_check;
  HypothesisCheck universal_check;
  HypothesisCheck h_dense_check;
  HypothesisCheck hc_dense_check;
  Eigen::Index off_support_points = 0;

  /// universal => characteristic => hc_dense, and h_dense => hc_dense.
  bool consistent() const;
};

KernelHypothesisReport kernel_hypotheses(const Matrix &gram_matrix, const Vector &p,
                                         const Tolerance &tol);

/// Indices j with p(j) > 0.
std::vector<Eigen::Index> support_of(const Vector &p);

bool is_psd(const Matrix &m, double rel_slack = 1e-10);

} // namespace cmekit
