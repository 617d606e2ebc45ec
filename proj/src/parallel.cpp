#include "cmekit/parallel/kernels.hpp"

#include "cmekit/error.hpp"

#include <omp.h>

#include <vector>

namespace cmekit::parallel {

int max_threads() { return omp_get_max_threads(); }

Matrix gram(const Kernel &k, const PointSet &points) {
  const Eigen::Index m = points.cols();
  Matrix g(m, m);
#pragma omp parallel for schedule(dynamic, 4)
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = k(points.col(i), points.col(j));
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

Matrix cross_gram(const Kernel &k, const PointSet &a, const PointSet &b) {
  Matrix g(a.cols(), b.cols());
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.cols(); ++i) g(i, j) = k(a.col(i), b.col(j));
  }
  return g;
}

Matrix scatter(const Matrix &a) {
  const Eigen::Index n = a.rows();
  const Eigen::Index len = a.cols();
  // row-major copy so each dot product streams contiguous memory
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = a;
  Matrix s(n, n);
  const double inv = len > 0 ? 1.0 / static_cast<double>(len) : 0.0;
#pragma omp parallel for schedule(dynamic, 8)
  for (Eigen::Index i = 0; i < n; ++i) {
    const double *ri = rows.data() + i * len;
    for (Eigen::Index k = 0; k <= i; ++k) {
      const double *rk = rows.data() + k * len;
      double acc = 0.0;
#pragma omp simd reduction(+ : acc)
      for (Eigen::Index j = 0; j < len; ++j) acc += ri[j] * rk[j];
      s(i, k) = acc * inv;
      s(k, i) = acc * inv;
    }
  }
  return s;
}

Eigen::MatrixXd label_counts(std::span<const std::int32_t> xs, std::span<const std::int32_t> ys,
                             Eigen::Index m, Eigen::Index q) {
  if (xs.size() != ys.size()) throw DimensionMismatch("label_counts: label arrays differ in length");
  const auto n = static_cast<std::int64_t>(xs.size());
  const int threads = omp_get_max_threads();
  std::vector<Eigen::MatrixXd> partial(static_cast<std::size_t>(threads),
                                       Eigen::MatrixXd::Zero(m, q));
#pragma omp parallel
  {
    Eigen::MatrixXd &local = partial[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(static)
    for (std::int64_t j = 0; j < n; ++j) {
      local(xs[static_cast<std::size_t>(j)], ys[static_cast<std::size_t>(j)]) += 1.0;
    }
  }
  // integer-valued partial counts make the reduction order-independent
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(m, q);
  for (const auto &p : partial) counts += p;
  return counts;
}

namespace reference {

Matrix gram(const Kernel &k, const PointSet &points) {
  const Eigen::Index m = points.cols();
  Matrix g(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) g(i, j) = k(points.col(i), points.col(j));
  return g;
}

Matrix cross_gram(const Kernel &k, const PointSet &a, const PointSet &b) {
  Matrix g(a.cols(), b.cols());
  for (Eigen::Index i = 0; i < a.cols(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) g(i, j) = k(a.col(i), b.col(j));
  return g;
}

Matrix scatter(const Matrix &a) {
  const Eigen::Index n = a.rows();
  Matrix s = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < a.cols(); ++j) acc += a(i, j) * a(k, j);
      s(i, k) = acc;
    }
  if (a.cols() > 0) s /= static_cast<double>(a.cols());
  return s;
}

Eigen::MatrixXd label_counts(std::span<const std::int32_t> xs, std::span<const std::int32_t> ys,
                             Eigen::Index m, Eigen::Index q) {
  if (xs.size() != ys.size()) throw DimensionMismatch("label_counts: label arrays differ in length");
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(m, q);
  for (std::size_t j = 0; j < xs.size(); ++j) counts(xs[j], ys[j]) += 1.0;
  return counts;
}

} // namespace reference

} // namespace cmekit::parallel
