#include "cmekit/corpus.hpp"

#include "cmekit/error.hpp"

#include <random>

namespace cmekit {

namespace {

constexpr double kLengthscale = 0.5;

using Rng = std::mt19937_64;

Eigen::Index uniform_size(Rng &rng, Eigen::Index lo, Eigen::Index hi) {
  return std::uniform_int_distribution<Eigen::Index>(lo, hi)(rng);
}

/// Scalar embeddings with gaps in [0.6, 1.4] so gaussian Grams stay well conditioned.
std::vector<Label> spaced_labels(Rng &rng, Eigen::Index count, const char *prefix) {
  std::uniform_real_distribution<double> gap(0.6, 1.4);
  std::vector<Label> out;
  double pos = 0.0;
  for (Eigen::Index i = 0; i < count; ++i) {
    pos += gap(rng);
    Vector e(1);
    e(0) = pos;
    out.push_back({std::string(prefix) + std::to_string(i), e});
  }
  return out;
}

/// Dirichlet(1) draw mixed with 10% uniform mass, so every entry is positive.
Vector full_support_weights(Rng &rng, Eigen::Index count) {
  std::gamma_distribution<double> g(1.0, 1.0);
  Vector w(count);
  for (Eigen::Index i = 0; i < count; ++i) w(i) = g(rng);
  w /= w.sum();
  w = 0.9 * w + Vector::Constant(count, 0.1 / static_cast<double>(count));
  return w / w.sum();
}

Matrix normalized(Matrix p) { return p / p.sum(); }

JointSpec make(std::vector<Label> x, std::vector<Label> y, Matrix p, Kernel kx, Kernel ky) {
  return JointSpec{FiniteJoint(std::move(x), std::move(y), normalized(std::move(p))), kx, ky};
}

} // namespace

std::optional<CorpusId> parse_corpus(const std::string &name) {
  if (name == "independence") return CorpusId::independence;
  if (name == "fullrank-random") return CorpusId::fullrank_random;
  if (name == "deterministic-map") return CorpusId::deterministic_map;
  if (name == "rank-deficient-kernel") return CorpusId::rank_deficient_kernel;
  if (name == "pointmass") return CorpusId::pointmass;
  return std::nullopt;
}

std::string corpus_name(CorpusId id) {
  switch (id) {
  case CorpusId::independence: return "independence";
  case CorpusId::fullrank_random: return "fullrank-random";
  case CorpusId::deterministic_map: return "deterministic-map";
  case CorpusId::rank_deficient_kernel: return "rank-deficient-kernel";
  case CorpusId::pointmass: return "pointmass";
  }
  return "unknown";
}

std::vector<std::string> corpus_names() {
  return {"independence", "fullrank-random", "deterministic-map", "rank-deficient-kernel",
          "pointmass"};
}

JointSpec corpus_joint(CorpusId id, std::uint64_t seed) {
  Rng rng(seed);
  const Kernel gauss = Kernel::gaussian(kLengthscale);
  switch (id) {
  case CorpusId::independence: {
    const Eigen::Index m = uniform_size(rng, 2, 8);
    const Eigen::Index q = uniform_size(rng, 2, 8);
    auto x = spaced_labels(rng, m, "x");
    auto y = spaced_labels(rng, q, "y");
    const Vector px = full_support_weights(rng, m);
    const Vector py = full_support_weights(rng, q);
    return make(std::move(x), std::move(y), px * py.transpose(), gauss, gauss);
  }
  case CorpusId::fullrank_random: {
    const Eigen::Index m = uniform_size(rng, 2, 8);
    const Eigen::Index q = uniform_size(rng, 2, 8);
    auto x = spaced_labels(rng, m, "x");
    auto y = spaced_labels(rng, q, "y");
    const Vector w = full_support_weights(rng, m * q);
    return make(std::move(x), std::move(y), w.reshaped(m, q), gauss, gauss);
  }
  case CorpusId::deterministic_map: {
    const Eigen::Index m = uniform_size(rng, 2, 8);
    const Eigen::Index q = uniform_size(rng, 2, 8);
    auto x = spaced_labels(rng, m, "x");
    auto y = spaced_labels(rng, q, "y");
    const Vector px = full_support_weights(rng, m);
    std::uniform_int_distribution<Eigen::Index> target(0, q - 1);
    Matrix p = Matrix::Zero(m, q);
    for (Eigen::Index i = 0; i < m; ++i) p(i, target(rng)) = px(i);
    return make(std::move(x), std::move(y), p, gauss, gauss);
  }
  case CorpusId::rank_deficient_kernel: {
    const Eigen::Index m = uniform_size(rng, 4, 8);
    const Eigen::Index q = uniform_size(rng, 2, 6);
    auto x = spaced_labels(rng, m, "x");
    auto y = spaced_labels(rng, q, "y");
    const Vector w = full_support_weights(rng, m * q);
    // affine features (x, 1): H holds only affine functions of the embedding
    return make(std::move(x), std::move(y), w.reshaped(m, q), Kernel::polynomial(1, 1.0), gauss);
  }
  case CorpusId::pointmass: {
    const Eigen::Index m = uniform_size(rng, 2, 6);
    const Eigen::Index q = uniform_size(rng, 2, 6);
    auto x = spaced_labels(rng, m, "x");
    auto y = spaced_labels(rng, q, "y");
    Matrix p = Matrix::Zero(m, q);
    p(uniform_size(rng, 0, m - 1), uniform_size(rng, 0, q - 1)) = 1.0;
    return make(std::move(x), std::move(y), p, gauss, gauss);
  }
  }
  throw InvalidSpec("unknown corpus id");
}

std::vector<JointSpec> corpus(CorpusId id, std::uint64_t seed, std::size_t count) {
  std::vector<JointSpec> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(corpus_joint(id, seed + i));
  return out;
}

} // namespace cmekit
