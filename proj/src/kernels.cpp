#include "cmekit/kernels.hpp"

#include "cmekit/error.hpp"
#include "cmekit/parallel/kernels.hpp"

#include <cmath>
#include <sstream>

namespace cmekit {

namespace {

template <class... Ts> struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

Vector signed_unit(Vector v) {
  const double n = v.norm();
  if (n == 0.0) return v;
  v /= n;
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  if (v(k) < 0.0) v = -v;
  return v;
}

Matrix zero_sum_basis(Eigen::Index m) {
  // orthonormal basis of {d : sum(d) = 0}
  return null_space(Matrix::Ones(1, m), Tolerance::pipeline());
}

Matrix restrict(const Matrix &g, const std::vector<Eigen::Index> &rows,
                const std::vector<Eigen::Index> &cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g(rows[i], cols[j]);
  return out;
}

double smallest_singular_value(const Matrix &m) {
  if (m.size() == 0) return 0.0;
  const Vector s = Eigen::JacobiSVD<Matrix>(m).singularValues();
  return s(s.size() - 1);
}

void require_gram(const Matrix &g, const Tolerance &tol) {
  require_finite(g, "gram");
  if (g.rows() != g.cols()) throw DimensionMismatch("gram matrix must be square");
  if ((g - g.transpose()).norm() > tol.atol + 1e-12 * g.norm()) {
    throw NotPsd("gram matrix is not symmetric");
  }
  if (!is_psd(g)) throw NotPsd("gram matrix is indefinite");
}

} // namespace

Kernel::Kernel(Variant v) : v_(std::move(v)) {
  std::visit(overloaded{
                 [](const GaussianKernel &k) {
                   if (!(k.lengthscale > 0.0)) throw InvalidSpec("gaussian lengthscale must be > 0");
                 },
                 [](const LaplacianKernel &k) {
                   if (!(k.lengthscale > 0.0)) throw InvalidSpec("laplacian lengthscale must be > 0");
                 },
                 [](const PolynomialKernel &k) {
                   if (k.degree < 1) throw InvalidSpec("polynomial degree must be >= 1");
                   if (!(k.offset >= 0.0)) throw InvalidSpec("polynomial offset must be >= 0");
                 },
                 [](const LinearKernel &) {},
                 [](const DeltaKernel &) {},
             },
             v_);
}

Kernel Kernel::gaussian(double lengthscale) { return Kernel(GaussianKernel{lengthscale}); }
Kernel Kernel::laplacian(double lengthscale) { return Kernel(LaplacianKernel{lengthscale}); }
Kernel Kernel::polynomial(int degree, double offset) {
  return Kernel(PolynomialKernel{degree, offset});
}
Kernel Kernel::linear() { return Kernel(LinearKernel{}); }
Kernel Kernel::delta() { return Kernel(DeltaKernel{}); }

double Kernel::operator()(const Eigen::Ref<const Vector> &a,
                          const Eigen::Ref<const Vector> &b) const {
  return std::visit(
      overloaded{
          [&](const GaussianKernel &k) {
            return std::exp(-(a - b).squaredNorm() / (2.0 * k.lengthscale * k.lengthscale));
          },
          [&](const LaplacianKernel &k) { return std::exp(-(a - b).norm() / k.lengthscale); },
          [&](const PolynomialKernel &k) { return std::pow(a.dot(b) + k.offset, k.degree); },
          [&](const LinearKernel &) { return a.dot(b); },
          [&](const DeltaKernel &) { return (a.array() == b.array()).all() ? 1.0 : 0.0; },
      },
      v_);
}

std::string Kernel::name() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const GaussianKernel &k) { os << "gaussian(" << k.lengthscale << ")"; },
                 [&](const LaplacianKernel &k) { os << "laplacian(" << k.lengthscale << ")"; },
                 [&](const PolynomialKernel &k) {
                   os << "polynomial(" << k.degree << ", " << k.offset << ")";
                 },
                 [&](const LinearKernel &) { os << "linear"; },
                 [&](const DeltaKernel &) { os << "delta"; },
             },
             v_);
  return os.str();
}

bool is_psd(const Matrix &m, double rel_slack) {
  if (m.size() == 0) return true;
  const double lmin = min_eigenvalue(m);
  const double scale = spectral_norm(m);
  return lmin >= -rel_slack * std::max(scale, 1.0);
}

Matrix gram(const Kernel &k, const PointSet &points) {
  require_finite(points, "gram");
  Matrix g = parallel::gram(k, points);
  if (!is_psd(g)) {
    throw NotPsd("gram: kernel " + k.name() + " produced an indefinite Gram matrix");
  }
  return g;
}

Matrix cross_gram(const Kernel &k, const PointSet &a, const PointSet &b) {
  require_finite(a, "cross_gram");
  require_finite(b, "cross_gram");
  if (a.rows() != b.rows()) throw DimensionMismatch("cross_gram: point dimensions differ");
  return parallel::cross_gram(k, a, b);
}

FeatureBasis feature_coordinates(const Matrix &gram_matrix, const Tolerance &tol) {
  require_gram(gram_matrix, tol);
  const Matrix sym = 0.5 * (gram_matrix + gram_matrix.transpose());
  const SpectralDecomposition eig = sym_eig(sym, tol);
  const double top = eig.values.size() > 0 ? std::max(eig.values(0), 0.0) : 0.0;
  const double cutoff = std::max(tol.rtol * top, 0.0);
  Eigen::Index r = 0;
  while (r < eig.values.size() && eig.values(r) > cutoff && eig.values(r) > 0.0) ++r;

  FeatureBasis fb;
  fb.rank = r;
  fb.eigenvalues = eig.values.head(r);
  fb.eigenvectors = eig.vectors.leftCols(r);
  fb.coords = fb.eigenvalues.cwiseSqrt().asDiagonal() * fb.eigenvectors.transpose();
  return fb;
}

std::vector<Eigen::Index> support_of(const Vector &p) {
  std::vector<Eigen::Index> s;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > 0.0) s.push_back(i);
  return s;
}

HypothesisCheck is_characteristic_finite(const Matrix &gram_matrix, const Tolerance &tol) {
  require_gram(gram_matrix, tol);
  const Eigen::Index m = gram_matrix.rows();
  HypothesisCheck out;
  if (m <= 1) {
    out.holds = true;
    out.evidence = m == 1 ? gram_matrix(0, 0) : 0.0;
    return out;
  }
  const Matrix z = zero_sum_basis(m);
  const Matrix gz = gram_matrix * z;
  const Eigen::Index r = numerical_rank(gz, tol);
  out.deficiency = (m - 1) - r;
  out.holds = out.deficiency == 0;
  out.evidence = smallest_singular_value(gz);
  if (!out.holds) {
    const Matrix nz = null_space(gz, tol);
    out.witness = signed_unit(z * nz.col(0));
  }
  return out;
}

HypothesisCheck is_l2_universal_finite(const Matrix &gram_matrix, const Vector &p,
                                       const Tolerance &tol) {
  require_gram(gram_matrix, tol);
  if (p.size() != gram_matrix.rows()) throw DimensionMismatch("weights and Gram differ in size");
  const auto s = support_of(p);
  HypothesisCheck out;
  const Matrix gs = restrict(gram_matrix, s, s);
  const Eigen::Index r = numerical_rank(gs, tol);
  out.deficiency = static_cast<Eigen::Index>(s.size()) - r;
  out.holds = out.deficiency == 0 && !s.empty();
  out.evidence = smallest_singular_value(gs);
  if (out.deficiency > 0) {
    const Matrix n = null_space(gs, tol);
    Vector w = Vector::Zero(p.size());
    for (std::size_t i = 0; i < s.size(); ++i) w(s[i]) = n(static_cast<Eigen::Index>(i), 0);
    out.witness = signed_unit(w);
  }
  return out;
}

HypothesisCheck hc_dense_finite(const Matrix &gram_matrix, const Vector &p, const Tolerance &tol) {
  require_gram(gram_matrix, tol);
  if (p.size() != gram_matrix.rows()) throw DimensionMismatch("weights and Gram differ in size");
  const auto s = support_of(p);
  const auto ns = static_cast<Eigen::Index>(s.size());
  HypothesisCheck out;
  if (ns <= 1) {
    out.holds = ns == 1;
    return out;
  }
  std::vector<Eigen::Index> all(static_cast<std::size_t>(gram_matrix.cols()));
  for (Eigen::Index j = 0; j < gram_matrix.cols(); ++j) all[static_cast<std::size_t>(j)] = j;
  Vector ps(ns);
  for (Eigen::Index i = 0; i < ns; ++i) ps(i) = p(s[static_cast<std::size_t>(i)]);
  ps /= ps.sum();
  // rows: support points; columns: centred canonical features k(., x_j) - E_p k(X, x_j)
  const Matrix centring = Matrix::Identity(ns, ns) - Vector::Ones(ns) * ps.transpose();
  const Matrix centred = centring * restrict(gram_matrix, s, all);
  const Eigen::Index r = numerical_rank(centred, tol);
  out.deficiency = (ns - 1) - r;
  out.holds = out.deficiency == 0;
  const Vector sv = Eigen::JacobiSVD<Matrix>(centred).singularValues();
  out.evidence = sv.size() >= ns - 1 ? sv(ns - 2) : 0.0;
  return out;
}

bool KernelHypothesisReport::consistent() const {
  if (l2_universal && !characteristic) return false;
  if (characteristic && !hc_dense) return false;
  if (h_dense && !hc_dense) return false;
  return true;
}

KernelHypothesisReport kernel_hypotheses(const Matrix &gram_matrix, const Vector &p,
                                         const Tolerance &tol) {
  KernelHypothesisReport r;
  r.characteristic_check = is_characteristic_finite(gram_matrix, tol);
  r.universal_check =
      is_l2_universal_finite(gram_matrix, Vector::Ones(gram_matrix.rows()), tol);
  r.h_dense_check = is_l2_universal_finite(gram_matrix, p, tol);
  r.hc_dense_check = hc_dense_finite(gram_matrix, p, tol);
  r.characteristic = r.characteristic_check.holds;
  r.l2_universal = r.universal_check.holds;
  r.h_dense = r.h_dense_check.holds;
  r.hc_dense = r.hc_dense_check.holds;
  r.off_support_points = gram_matrix.rows() - static_cast<Eigen::Index>(support_of(p).size());
  return r;
}

} // namespace cmekit
