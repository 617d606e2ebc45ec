#pragma once

#include "cmekit/cme.hpp"
#include "cmekit/discrete.hpp"
#include "cmekit/linalg.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cmekit {

inline constexpr const char *kSampleGenerator = "mt19937_64/discrete_distribution";

/// i.i.d. label pairs (x_j, y_j) given as indices into the joint's label sets.
struct SampleSet {
  std::vector<std::int32_t> x;
  std::vector<std::int32_t> y;
  std::uint64_t seed = 0;
  std::string generator = kSampleGenerator;

  std::size_t size() const { return x.size(); }
};

SampleSet draw_samples(const FiniteJoint &joint, std::size_t count, std::uint64_t seed);

/// Empirical moments: the population formulas under the empirical table
/// counts / J.
struct EmpiricalMoments {
  Moments moments;
  Matrix counts;
  std::size_t sample_count = 0;
};

EmpiricalMoments empirical_moments(const SampleSet &samples, const FeatureBasis &hx,
                                   const FeatureBasis &gy);

/// Sample Gram matrices K = k(x_i, x_j) and L = l(y_i, y_j).
Matrix sample_gram_x(const SampleSet &samples, const FeatureBasis &hx);
Matrix sample_gram_y(const SampleSet &samples, const FeatureBasis &gy);

/// uC_YX (uC_X + eps I)^{-1} phi(x) in feature coordinates.
Vector regularized_cme(const EmpiricalMoments &emp, double eps, const Vector &phi_x);

/// The same estimator in Gram form: sum_j beta_j psi(y_j) with
/// beta = (K + J eps I)^{-1} k_x. Cost is cubic in the sample count.
Vector regularized_cme_gram(const SampleSet &samples, const FeatureBasis &hx,
                            const FeatureBasis &gy, double eps, const Vector &phi_x);

/// mu_Y + (C_X^+ C_XY)^T (phi(x) - mu_X) with empirical blocks.
Vector naive_empirical_cme(const EmpiricalMoments &emp, const Vector &phi_x, const Tolerance &tol);

/// Rank-n truncation in the eigenbasis of the empirical C_X; throws
/// RankOutOfBounds unless 1 <= n <= rank(C_X-hat).
Vector truncated_empirical_cme(const EmpiricalMoments &emp, Eigen::Index n, const Vector &phi_x,
                               const Tolerance &tol);

struct EstimatorConfig {
  enum class Kind { naive, regularized, truncated };
  Kind kind = Kind::regularized;
  double epsilon = 0.0;     // fixed ridge when > 0, else J^{-1/2}
  Eigen::Index rank = 0;    // fixed truncation when > 0, else ceil(J^{1/3})
  Tolerance tol = Tolerance::pipeline();

  /// The epsilon or truncation rank used at sample size J (0 for naive).
  double schedule_value(std::size_t sample_count) const;
};

struct ConvergenceRow {
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
  double error = 0.0;
  double schedule_value = 0.0;
};

struct ConvergenceSummary {
  std::size_t sample_count = 0;
  double mean = 0.0;
  double sd = 0.0;
};

/// err(J, seed) = sum_x p_X(x) mmd(estimate(x), mu_{Y|X=x})^2, one row per
/// grid point, sorted by (J, seed) regardless of execution order.
std::vector<ConvergenceRow> convergence_study(const FiniteJoint &joint, const FeatureBasis &hx,
                                              const FeatureBasis &gy, const EstimatorConfig &config,
                                              const std::vector<std::size_t> &sample_counts,
                                              const std::vector<std::uint64_t> &seeds);

std::vector<ConvergenceSummary> summarize(const std::vector<ConvergenceRow> &rows);

/// Fraction of consecutive J steps along which the mean error decreases.
double monotone_trend(const std::vector<ConvergenceSummary> &summary);

struct WhitenedCovariance {
  Matrix s_j;         // n x n whitened sample covariance
  Matrix c_hat_n;     // truncated empirical covariance in the population eigenbasis
  Vector sigma;       // leading n population eigenvalues
  double decomposition_residual = 0.0; // ||C_hat^(n) - D^1/2 S_J D^1/2||_F
  double lambda_min_c = 0.0;
  double lambda_min_s = 0.0;
  double bound_residual = 0.0;         // lambda_min(C_hat^(n)) - sigma_n lambda_min(S_J)
  double distance_to_identity = 0.0;   // ||S_J - I||_F
  double eigenvector_deviation = 0.0;  // ||P_hat^(n) - P^(n)||_F, empirical vs population
};

/// Karhunen-Loeve whitening of the samples with the population eigenpairs of
/// C_X, centred at the population mean. Throws SingularPopulationSpectrum
/// when sigma_n is below the cutoff.
WhitenedCovariance whitened_covariance(const SampleSet &samples, const Moments &population,
                                       Eigen::Index n, const Tolerance &tol);

enum class EntryDistribution { normal, rademacher };

struct SpectrumResult {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

/// Extreme eigenvalues of S_J = A A^T / J for an n x J matrix of i.i.d.
/// unit-variance entries.
SpectrumResult spectrum_experiment(Eigen::Index n, Eigen::Index sample_count, std::uint64_t seed,
                                   EntryDistribution dist);

/// (1 - sqrt(gamma))^2 and (1 + sqrt(gamma))^2.
SpectrumResult spectrum_limits(double gamma);

} // namespace cmekit
