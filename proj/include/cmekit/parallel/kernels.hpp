#pragma once

// Data-parallel inner loops. Each OpenMP kernel has a plain serial twin in
// `reference` that the tests compare against and the benchmark times.

#include "cmekit/kernels.hpp"
#include "cmekit/linalg.hpp"

#include <cstdint>
#include <span>

namespace cmekit::parallel {

/// k(x_i, x_j) over the columns of `points`; rows are filled in parallel.
Matrix gram(const Kernel &k, const PointSet &points);

Matrix cross_gram(const Kernel &k, const PointSet &a, const PointSet &b);

/// (1/J) A A^T for an n x J matrix A (the sample scatter of J columns).
Matrix scatter(const Matrix &a);

/// Joint label histogram: counts(x, y) over parallel arrays of label indices.
Eigen::MatrixXd label_counts(std::span<const std::int32_t> xs, std::span<const std::int32_t> ys,
                             Eigen::Index m, Eigen::Index q);

int max_threads();

namespace reference {

Matrix gram(const Kernel &k, const PointSet &points);
Matrix cross_gram(const Kernel &k, const PointSet &a, const PointSet &b);
Matrix scatter(const Matrix &a);
Eigen::MatrixXd label_counts(std::span<const std::int32_t> xs, std::span<const std::int32_t> ys,
                             Eigen::Index m, Eigen::Index q);

} // namespace reference

} // namespace cmekit::parallel
