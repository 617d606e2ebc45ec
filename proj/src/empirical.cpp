#include "cmekit/empirical.hpp"

#include "cmekit/error.hpp"
#include "cmekit/parallel/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

namespace cmekit {

namespace {

Matrix gather_columns(const Matrix &coords, const std::vector<std::int32_t> &idx) {
  Matrix out(coords.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = coords.col(idx[j]);
  return out;
}

void require_samples(const SampleSet &s) {
  if (s.size() == 0) throw InvalidSpec("sample set is empty");
  if (s.x.size() != s.y.size()) throw DimensionMismatch("sample x and y columns differ in length");
}

} // namespace

SampleSet draw_samples(const FiniteJoint &joint, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw InvalidSpec("draw_samples: sample count must be >= 1");
  const Eigen::Index q = joint.q();
  std::vector<double> weights;
  weights.reserve(static_cast<std::size_t>(joint.m() * q));
  for (Eigen::Index x = 0; x < joint.m(); ++x)
    for (Eigen::Index y = 0; y < q; ++y) weights.push_back(joint.p()(x, y));

  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::int64_t> pick(weights.begin(), weights.end());
  SampleSet s;
  s.seed = seed;
  s.x.resize(count);
  s.y.resize(count);
  for (std::size_t j = 0; j < count; ++j) {
    const std::int64_t cell = pick(rng);
    s.x[j] = static_cast<std::int32_t>(cell / q);
    s.y[j] = static_cast<std::int32_t>(cell % q);
  }
  return s;
}

EmpiricalMoments empirical_moments(const SampleSet &samples, const FeatureBasis &hx,
                                   const FeatureBasis &gy) {
  require_samples(samples);
  for (std::size_t j = 0; j < samples.size(); ++j) {
    if (samples.x[j] < 0 || samples.x[j] >= hx.points() || samples.y[j] < 0 ||
        samples.y[j] >= gy.points()) {
      throw DimensionMismatch("sample " + std::to_string(j) + " references an unknown label");
    }
  }
  EmpiricalMoments e;
  e.sample_count = samples.size();
  e.counts = parallel::label_counts(samples.x, samples.y, hx.points(), gy.points());
  e.moments = moments_from_table(e.counts / static_cast<double>(e.sample_count), hx, gy);
  return e;
}

Matrix sample_gram_x(const SampleSet &samples, const FeatureBasis &hx) {
  const Matrix f = gather_columns(hx.coords, samples.x);
  return f.transpose() * f;
}

Matrix sample_gram_y(const SampleSet &samples, const FeatureBasis &gy) {
  const Matrix f = gather_columns(gy.coords, samples.y);
  return f.transpose() * f;
}

Vector regularized_cme(const EmpiricalMoments &emp, double eps, const Vector &phi_x) {
  if (!(eps > 0.0)) throw InvalidSpec("regularized_cme: epsilon must be > 0");
  const Moments &mo = emp.moments;
  if (phi_x.size() != mo.uc_x.rows()) throw DimensionMismatch("regularized_cme: query is not an H-vector");
  const Matrix reg = mo.uc_x + eps * Matrix::Identity(mo.uc_x.rows(), mo.uc_x.cols());
  return mo.uc_yx() * reg.llt().solve(phi_x);
}

Vector regularized_cme_gram(const SampleSet &samples, const FeatureBasis &hx,
                            const FeatureBasis &gy, double eps, const Vector &phi_x) {
  require_samples(samples);
  if (!(eps > 0.0)) throw InvalidSpec("regularized_cme_gram: epsilon must be > 0");
  if (phi_x.size() != hx.rank) throw DimensionMismatch("regularized_cme_gram: query is not an H-vector");
  const Matrix fx = gather_columns(hx.coords, samples.x);
  const Matrix fy = gather_columns(gy.coords, samples.y);
  const auto count = static_cast<double>(samples.size());
  Matrix k = fx.transpose() * fx;
  k.diagonal().array() += count * eps;
  const Vector kx = fx.transpose() * phi_x;
  const Vector beta = k.llt().solve(kx);
  return fy * beta;
}

Vector naive_empirical_cme(const EmpiricalMoments &emp, const Vector &phi_x, const Tolerance &tol) {
  // ran C_XY-hat lies in ran C_X-hat for every sample set, so the fit never refuses
  return predict_centered(fit_centered(emp.moments, tol), phi_x);
}

Vector truncated_empirical_cme(const EmpiricalMoments &emp, Eigen::Index n, const Vector &phi_x,
                               const Tolerance &tol) {
  const Eigen::Index rank = numerical_rank(emp.moments.c_x, tol);
  if (n < 1 || n > rank) {
    throw RankOutOfBounds("truncated_empirical_cme: n = " + std::to_string(n) +
                          " outside [1, rank(C_X-hat) = " + std::to_string(rank) + "]");
  }
  return predict_truncated(fit_truncated(emp.moments, n, CmeVariant::centred, tol), phi_x);
}

double EstimatorConfig::schedule_value(std::size_t sample_count) const {
  const auto j = static_cast<double>(sample_count);
  switch (kind) {
  case Kind::regularized:
    return epsilon > 0.0 ? epsilon : 1.0 / std::sqrt(j);
  case Kind::truncated:
    return rank > 0 ? static_cast<double>(rank) : std::ceil(std::cbrt(j) - 1e-9);
  case Kind::naive:
    break;
  }
  return 0.0;
}

namespace {

double estimate_error(const FiniteJoint &joint, const FeatureBasis &hx, const FeatureBasis &gy,
                      const ConditionalOracle &oracle, const EstimatorConfig &config,
                      std::size_t count, std::uint64_t seed, double &schedule) {
  const SampleSet samples = draw_samples(joint, count, seed);
  const EmpiricalMoments emp = empirical_moments(samples, hx, gy);
  const Vector px = joint.px();
  schedule = config.schedule_value(count);

  Matrix est(gy.rank, joint.m());
  switch (config.kind) {
  case EstimatorConfig::Kind::regularized: {
    const Moments &mo = emp.moments;
    const Matrix reg = mo.uc_x + schedule * Matrix::Identity(mo.uc_x.rows(), mo.uc_x.cols());
    est = mo.uc_yx() * reg.llt().solve(hx.coords);
    break;
  }
  case EstimatorConfig::Kind::truncated: {
    const Eigen::Index rank = numerical_rank(emp.moments.c_x, config.tol);
    const Eigen::Index n = std::min<Eigen::Index>(static_cast<Eigen::Index>(schedule), rank);
    schedule = static_cast<double>(n);
    if (n >= 1) {
      est = predict_all(fit_truncated(emp.moments, n, CmeVariant::centred, config.tol), hx);
    } else {
      est = predict_all(fit_centered(emp.moments, config.tol), hx);
    }
    break;
  }
  case EstimatorConfig::Kind::naive:
    est = predict_all(fit_centered(emp.moments, config.tol), hx);
    break;
  }

  double err = 0.0;
  for (Eigen::Index x = 0; x < joint.m(); ++x) {
    if (!oracle.on_support[static_cast<std::size_t>(x)]) continue;
    err += px(x) * (est.col(x) - oracle.means.col(x)).squaredNorm();
  }
  return err;
}

} // namespace

std::vector<ConvergenceRow> convergence_study(const FiniteJoint &joint, const FeatureBasis &hx,
                                              const FeatureBasis &gy, const EstimatorConfig &config,
                                              const std::vector<std::size_t> &sample_counts,
                                              const std::vector<std::uint64_t> &seeds) {
  std::vector<std::size_t> counts = sample_counts;
  std::vector<std::uint64_t> sorted_seeds = seeds;
  std::sort(counts.begin(), counts.end());
  std::sort(sorted_seeds.begin(), sorted_seeds.end());
  const ConditionalOracle oracle = build_oracle(joint, gy);

  const auto cells = static_cast<std::int64_t>(counts.size() * sorted_seeds.size());
  std::vector<ConvergenceRow> rows(static_cast<std::size_t>(cells));
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t c = 0; c < cells; ++c) {
    const auto ci = static_cast<std::size_t>(c) / sorted_seeds.size();
    const auto si = static_cast<std::size_t>(c) % sorted_seeds.size();
    ConvergenceRow row;
    row.sample_count = counts[ci];
    row.seed = sorted_seeds[si];
    row.error = estimate_error(joint, hx, gy, oracle, config, row.sample_count, row.seed,
                               row.schedule_value);
    rows[static_cast<std::size_t>(c)] = row;
  }
  return rows;
}

std::vector<ConvergenceSummary> summarize(const std::vector<ConvergenceRow> &rows) {
  std::map<std::size_t, std::vector<double>> groups;
  for (const auto &r : rows) groups[r.sample_count].push_back(r.error);
  std::vector<ConvergenceSummary> out;
  for (const auto &[count, errs] : groups) {
    ConvergenceSummary s;
    s.sample_count = count;
    double sum = 0.0;
    for (double e : errs) sum += e;
    s.mean = sum / static_cast<double>(errs.size());
    double var = 0.0;
    for (double e : errs) var += (e - s.mean) * (e - s.mean);
    s.sd = errs.size() > 1 ? std::sqrt(var / static_cast<double>(errs.size() - 1)) : 0.0;
    out.push_back(s);
  }
  return out;
}

double monotone_trend(const std::vector<ConvergenceSummary> &summary) {
  if (summary.size() < 2) return 1.0;
  std::size_t down = 0;
  for (std::size_t i = 1; i < summary.size(); ++i)
    if (summary[i].mean <= summary[i - 1].mean) ++down;
  return static_cast<double>(down) / static_cast<double>(summary.size() - 1);
}

WhitenedCovariance whitened_covariance(const SampleSet &samples, const Moments &population,
                                       Eigen::Index n, const Tolerance &tol) {
  require_samples(samples);
  const SpectralDecomposition eig = sym_eig(population.c_x, tol);
  if (n < 1 || n > eig.values.size()) {
    throw RankOutOfBounds("whitened_covariance: n = " + std::to_string(n) + " outside [1, " +
                          std::to_string(eig.values.size()) + "]");
  }
  const double cutoff = pinv_cutoff(std::max(eig.values(0), 0.0), tol);
  if (!(eig.values(n - 1) > cutoff)) {
    throw SingularPopulationSpectrum("whitened_covariance: sigma_" + std::to_string(n) + " = " +
                                     std::to_string(eig.values(n - 1)) + " is below the cutoff");
  }
  WhitenedCovariance w;
  w.sigma = eig.values.head(n);
  const Matrix basis = eig.vectors.leftCols(n);

  // projected population-centred features V_j^(n) per label, then per sample
  const Matrix label_scores = basis.transpose() * (population.hx.coords.colwise() - population.mu_x);
  const Matrix v = gather_columns(label_scores, samples.x);
  const Matrix xi = w.sigma.cwiseSqrt().cwiseInverse().asDiagonal() * v;

  w.s_j = parallel::scatter(xi);
  w.c_hat_n = parallel::scatter(v);
  const Vector root = w.sigma.cwiseSqrt();
  w.decomposition_residual = (w.c_hat_n - root.asDiagonal() * w.s_j * root.asDiagonal()).norm();
  w.lambda_min_c = min_eigenvalue(w.c_hat_n);
  w.lambda_min_s = min_eigenvalue(w.s_j);
  w.bound_residual = w.lambda_min_c - w.sigma(n - 1) * w.lambda_min_s;
  w.distance_to_identity = (w.s_j - Matrix::Identity(n, n)).norm();

  const EmpiricalMoments emp = empirical_moments(samples, population.hx, population.gy);
  const SpectralDecomposition emp_eig = sym_eig(emp.moments.c_x, tol);
  w.eigenvector_deviation =
      (leading_projector(emp_eig.vectors, n) - leading_projector(eig.vectors, n)).norm();
  return w;
}

SpectrumResult spectrum_experiment(Eigen::Index n, Eigen::Index sample_count, std::uint64_t seed,
                                   EntryDistribution dist) {
  if (n < 1 || sample_count < 1) throw InvalidSpec("spectrum_experiment: n and J must be >= 1");
  std::mt19937_64 rng(seed);
  Matrix a(n, sample_count);
  if (dist == EntryDistribution::normal) {
    std::normal_distribution<double> draw(0.0, 1.0);
    for (Eigen::Index j = 0; j < sample_count; ++j)
      for (Eigen::Index i = 0; i < n; ++i) a(i, j) = draw(rng);
  } else {
    std::bernoulli_distribution coin(0.5);
    for (Eigen::Index j = 0; j < sample_count; ++j)
      for (Eigen::Index i = 0; i < n; ++i) a(i, j) = coin(rng) ? 1.0 : -1.0;
  }
  const Matrix s = parallel::scatter(a);
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(s, Eigen::EigenvaluesOnly).eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

SpectrumResult spectrum_limits(double gamma) {
  const double r = std::sqrt(gamma);
  return {(1.0 - r) * (1.0 - r), (1.0 + r) * (1.0 + r)};
}

} // namespace cmekit
