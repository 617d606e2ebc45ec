#include "cmekit/discrete.hpp"

#include "cmekit/error.hpp"

#include <cmath>
#include <set>
#include <string>

namespace cmekit {

namespace {

PointSet stack_embeddings(const std::vector<Label> &labels) {
  const Eigen::Index d = labels.front().embedding.size();
  PointSet pts(d, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t j = 0; j < labels.size(); ++j) pts.col(static_cast<Eigen::Index>(j)) = labels[j].embedding;
  return pts;
}

void validate_labels(const std::vector<Label> &labels, const char *axis) {
  if (labels.empty()) throw InvalidSpec(std::string(axis) + " labels must not be empty");
  std::set<std::string> names;
  const Eigen::Index d = labels.front().embedding.size();
  for (const auto &l : labels) {
    if (!names.insert(l.name).second) {
      throw InvalidSpec(std::string("duplicate ") + axis + " label '" + l.name + "'");
    }
    if (l.embedding.size() != d || d == 0) {
      throw InvalidSpec(std::string(axis) + " embeddings must share one non-zero dimension");
    }
    if (!l.embedding.allFinite()) {
      throw InvalidSpec(std::string(axis) + " embedding of '" + l.name + "' is not finite");
    }
  }
}

void symmetrize(Matrix &m) { m = 0.5 * (m + m.transpose()).eval(); }

} // namespace

std::vector<Label> index_labels(Eigen::Index count) {
  std::vector<Label> out;
  for (Eigen::Index i = 0; i < count; ++i) {
    Vector e(1);
    e(0) = static_cast<double>(i);
    out.push_back({std::to_string(i), e});
  }
  return out;
}

FiniteJoint::FiniteJoint(std::vector<Label> x_labels, std::vector<Label> y_labels, Matrix p)
    : x_(std::move(x_labels)), y_(std::move(y_labels)), p_(std::move(p)) {
  validate_labels(x_, "x");
  validate_labels(y_, "y");
  if (p_.rows() != static_cast<Eigen::Index>(x_.size()) ||
      p_.cols() != static_cast<Eigen::Index>(y_.size())) {
    throw InvalidSpec("probability table is " + std::to_string(p_.rows()) + "x" +
                      std::to_string(p_.cols()) + " but there are " + std::to_string(x_.size()) +
                      " x labels and " + std::to_string(y_.size()) + " y labels");
  }
  if (!p_.allFinite()) throw InvalidSpec("probability table contains NaN or Inf");
  if (p_.minCoeff() < 0.0) throw InvalidSpec("probability table has a negative entry");
  const double total = p_.sum();
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidSpec("probability table sums to " + std::to_string(total) + ", expected 1");
  }
}

PointSet FiniteJoint::x_points() const { return stack_embeddings(x_); }
PointSet FiniteJoint::y_points() const { return stack_embeddings(y_); }

Matrix Moments::block() const {
  const Eigen::Index ry = c_y.rows();
  const Eigen::Index rx = c_x.rows();
  Matrix c(ry + rx, ry + rx);
  c.topLeftCorner(ry, ry) = c_y;
  c.topRightCorner(ry, rx) = c_yx();
  c.bottomLeftCorner(rx, ry) = c_xy;
  c.bottomRightCorner(rx, rx) = c_x;
  return c;
}

Matrix Moments::uncentred_block() const {
  const Eigen::Index ry = uc_y.rows();
  const Eigen::Index rx = uc_x.rows();
  Matrix c(ry + rx, ry + rx);
  c.topLeftCorner(ry, ry) = uc_y;
  c.topRightCorner(ry, rx) = uc_yx();
  c.bottomLeftCorner(rx, ry) = uc_xy;
  c.bottomRightCorner(rx, rx) = uc_x;
  return c;
}

Moments moments_from_table(const Matrix &p, const FeatureBasis &hx, const FeatureBasis &gy) {
  if (p.rows() != hx.points() || p.cols() != gy.points()) {
    throw DimensionMismatch("moments: feature bases do not match the probability table");
  }
  Moments mo;
  mo.hx = hx;
  mo.gy = gy;
  mo.joint = p;
  mo.px = p.rowwise().sum();
  mo.py = p.colwise().sum().transpose();

  const Matrix &phi = hx.coords;
  const Matrix &psi = gy.coords;
  mo.mu_x = phi * mo.px;
  mo.mu_y = psi * mo.py;

  mo.uc_x = phi * mo.px.asDiagonal() * phi.transpose();
  mo.uc_y = psi * mo.py.asDiagonal() * psi.transpose();
  mo.uc_xy = phi * p * psi.transpose();

  // centred blocks from centred features rather than by subtraction
  const Matrix phi_c = phi.colwise() - mo.mu_x;
  const Matrix psi_c = psi.colwise() - mo.mu_y;
  mo.c_x = phi_c * mo.px.asDiagonal() * phi_c.transpose();
  mo.c_y = psi_c * mo.py.asDiagonal() * psi_c.transpose();
  mo.c_xy = phi_c * p * psi_c.transpose();

  symmetrize(mo.uc_x);
  symmetrize(mo.uc_y);
  symmetrize(mo.c_x);
  symmetrize(mo.c_y);
  return mo;
}

Moments embed_moments(const FiniteJoint &joint, const FeatureBasis &hx, const FeatureBasis &gy) {
  return moments_from_table(joint.p(), hx, gy);
}

ConditionalOracle conditional_table(const FiniteJoint &joint) {
  ConditionalOracle o;
  const Vector px = joint.px();
  o.table = Matrix::Zero(joint.m(), joint.q());
  o.on_support.assign(static_cast<std::size_t>(joint.m()), false);
  for (Eigen::Index x = 0; x < joint.m(); ++x) {
    if (px(x) > 0.0) {
      o.on_support[static_cast<std::size_t>(x)] = true;
      o.table.row(x) = joint.p().row(x) / px(x);
    }
  }
  return o;
}

Matrix oracle_cme(const FiniteJoint &joint, const FeatureBasis &gy) {
  if (gy.points() != joint.q()) throw DimensionMismatch("oracle_cme: G basis does not match Y labels");
  const ConditionalOracle t = conditional_table(joint);
  return gy.coords * t.table.transpose();
}

ConditionalCovariances oracle_conditional_cov(const FiniteJoint &joint, const FeatureBasis &gy) {
  if (gy.points() != joint.q()) {
    throw DimensionMismatch("oracle_conditional_cov: G basis does not match Y labels");
  }
  const ConditionalOracle t = conditional_table(joint);
  const Vector px = joint.px();
  const Eigen::Index r = gy.rank;
  ConditionalCovariances out;
  out.expected = Matrix::Zero(r, r);
  for (Eigen::Index x = 0; x < joint.m(); ++x) {
    Matrix cov = Matrix::Zero(r, r);
    if (t.on_support[static_cast<std::size_t>(x)]) {
      const Vector w = t.table.row(x).transpose();
      const Vector mean = gy.coords * w;
      const Matrix centred = gy.coords.colwise() - mean;
      cov = centred * w.asDiagonal() * centred.transpose();
      symmetrize(cov);
      out.expected += px(x) * cov;
    }
    out.per_x.push_back(std::move(cov));
  }
  symmetrize(out.expected);
  return out;
}

ConditionalOracle build_oracle(const FiniteJoint &joint, const FeatureBasis &gy) {
  ConditionalOracle o = conditional_table(joint);
  o.means = gy.coords * o.table.transpose();
  ConditionalCovariances c = oracle_conditional_cov(joint, gy);
  o.covs = std::move(c.per_x);
  o.expected_cov = std::move(c.expected);
  return o;
}

Vector f_g(const FiniteJoint &joint, const FeatureBasis &gy, const Vector &g) {
  if (g.size() != gy.rank) throw DimensionMismatch("f_g: g is not in G-coordinates");
  return oracle_cme(joint, gy).transpose() * g;
}

double mmd(const Vector &a, const Vector &b) {
  if (a.size() != b.size()) throw DimensionMismatch("mmd: embeddings live in different bases");
  return (a - b).norm();
}

Vector constant_function_coordinates(const Matrix &gram_matrix, const FeatureBasis &hx,
                                     const Vector &p, const Tolerance &tol) {
  const auto s = support_of(p);
  const auto ns = static_cast<Eigen::Index>(s.size());
  // alpha lives on the support points; h = sum_j alpha_j phi(x_j)
  Matrix gs(ns, ns);
  for (Eigen::Index i = 0; i < ns; ++i)
    for (Eigen::Index j = 0; j < ns; ++j) gs(i, j) = gram_matrix(s[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(j)]);
  const Vector alpha_s = pinv(gs, tol) * Vector::Ones(ns);
  Vector alpha = Vector::Zero(gram_matrix.rows());
  for (Eigen::Index i = 0; i < ns; ++i) alpha(s[static_cast<std::size_t>(i)]) = alpha_s(i);
  return hx.coords * alpha;
}

double weighted_cov(const Vector &a, const Vector &b, const Vector &p) {
  const double ea = p.dot(a);
  const double eb = p.dot(b);
  return p.dot(((a.array() - ea) * (b.array() - eb)).matrix());
}

} // namespace cmekit
