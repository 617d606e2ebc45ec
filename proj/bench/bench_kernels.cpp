// Parallel kernels against their serial references.

#include "cmekit/parallel/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

namespace {

using namespace cmekit;

Matrix random_points(Eigen::Index d, Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Matrix m(d, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < d; ++i) m(i, j) = z(rng);
  return m;
}

template <Matrix (*Fn)(const Kernel &, const PointSet &)>
void BM_Gram(benchmark::State &state) {
  const Matrix pts = random_points(3, state.range(0), 1);
  const Kernel k = Kernel::gaussian(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(k, pts));
  state.SetComplexityN(state.range(0));
}

template <Matrix (*Fn)(const Matrix &)>
void BM_Scatter(benchmark::State &state) {
  const Matrix a = random_points(state.range(0), 4 * state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(a));
}

template <Eigen::MatrixXd (*Fn)(std::span<const std::int32_t>, std::span<const std::int32_t>, Eigen::Index,
                                Eigen::Index)>
void BM_LabelCounts(benchmark::State &state) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int32_t> label(0, 15);
  std::vector<std::int32_t> xs(static_cast<std::size_t>(state.range(0))), ys(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    xs[j] = label(rng);
    ys[j] = label(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(Fn(xs, ys, 16, 16));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_Gram<parallel::reference::gram>)->Name("gram/serial")->RangeMultiplier(4)->Range(64, 2048);
BENCHMARK(BM_Gram<parallel::gram>)->Name("gram/openmp")->RangeMultiplier(4)->Range(64, 2048)->UseRealTime();
BENCHMARK(BM_Scatter<parallel::reference::scatter>)->Name("scatter/serial")->Arg(100)->Arg(500);
BENCHMARK(BM_Scatter<parallel::scatter>)->Name("scatter/openmp")->Arg(100)->Arg(500)->UseRealTime();
BENCHMARK(BM_LabelCounts<parallel::reference::label_counts>)->Name("label_counts/serial")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_LabelCounts<parallel::label_counts>)->Name("label_counts/openmp")->Arg(1 << 16)->Arg(1 << 20)->UseRealTime();

} // namespace

BENCHMARK_MAIN();
