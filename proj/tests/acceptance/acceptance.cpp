// One line per acceptance criterion; exit status is the number of failures.

#include "cmekit/cme.hpp"
#include "cmekit/corpus.hpp"
#include "cmekit/empirical.hpp"
#include "cmekit/gaussian.hpp"
#include "cmekit/kernels.hpp"
#include "cmekit/model.hpp"
#include "generators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace {

using namespace cmekit;

const Tolerance kTol = Tolerance::pipeline();

struct Outcome {
  bool ok = true;
  std::string detail;
};

class Tracker {
public:
  void require(bool cond, const std::string &what) {
    if (!cond && outcome_.ok) {
      outcome_.ok = false;
      outcome_.detail = what;
    }
  }
  void max_into(double &slot, double value) { slot = std::max(slot, std::isnan(value) ? INFINITY : value); }
  Outcome finish(std::string summary) {
    if (outcome_.ok) outcome_.detail = std::move(summary);
    return outcome_;
  }

private:
  Outcome outcome_;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double max_increase(const std::vector<SweepPoint> &sweep) {
  double worst = 0.0;
  for (std::size_t i = 1; i < sweep.size(); ++i) worst = std::max(worst, sweep[i].error - sweep[i - 1].error);
  return worst;
}

Outcome oracle_equivalence() {
  Tracker t;
  double centred = 0.0, uncentred = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const PreparedJoint pj = prepare(corpus_joint(CorpusId::fullrank_random, seed), kTol);
    t.max_into(centred, max_pointwise_error(pj.oracle, predict_all(fit_centered(pj.moments, kTol), pj.hx)));
    t.max_into(uncentred,
               max_pointwise_error(pj.oracle, predict_all(fit_uncentered(pj.moments, kTol), pj.hx)));
  }
  t.require(centred <= 1e-8, "centred error " + fmt(centred));
  t.require(uncentred <= 1e-8, "uncentred error " + fmt(uncentred));
  return t.finish("max centred " + fmt(centred) + ", uncentred " + fmt(uncentred));
}

Outcome pathology() {
  Tracker t;
  double classical = 0.0, centred = 0.0, min_mu = INFINITY;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PreparedJoint pj = prepare(corpus_joint(CorpusId::independence, seed), kTol);
    t.require(is_independent(pj.spec.joint), "joint " + std::to_string(seed) + " not independent");
    min_mu = std::min(min_mu, pj.moments.mu_y.norm());
    const CenteredCmeOperator op = fit_centered(pj.moments, kTol);
    for (Eigen::Index x = 0; x < pj.spec.joint.m(); ++x) {
      const Vector phi = pj.hx.feature(x);
      t.max_into(classical, classical_cme(pj.moments, phi, kTol).output.norm());
      t.max_into(centred, mmd(predict_centered(op, phi), pj.moments.mu_y));
    }
  }
  t.require(min_mu >= 0.1, "||mu_Y|| " + fmt(min_mu));
  t.require(classical <= 1e-10, "classical norm " + fmt(classical));
  t.require(centred <= 1e-12, "centred gap " + fmt(centred));
  return t.finish("classical norm " + fmt(classical) + ", centred gap " + fmt(centred) +
                  ", min ||mu_Y|| " + fmt(min_mu));
}

Outcome truncation() {
  Tracker t;
  double increase = 0.0, centred_final = 0.0, uncentred_final = 0.0, limit_gap = 0.0;
  int dense = 0, not_dense = 0;
  for (const std::string &name : corpus_names()) {
    const CorpusId id = *parse_corpus(name);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const PreparedJoint pj = prepare(corpus_joint(id, seed), kTol);
      if (pj.hx.rank == 0) continue;
      const auto as = check_assumptions(pj.moments, pj.kernel_x_report, kTol);
      const auto sweep = truncation_sweep(pj.moments, pj.oracle, CmeVariant::centred, kTol);
      const auto usweep = truncation_sweep(pj.moments, pj.oracle, CmeVariant::uncentred, kTol);
      t.max_into(increase, max_increase(sweep));
      if (sweep.empty() || usweep.empty()) continue;
      if (as.assumption_b) {
        ++dense;
        t.max_into(centred_final, sweep.back().error);
        if (as.assumption_a) t.max_into(uncentred_final, usweep.back().error);
      } else {
        // Without H_C density the sweep limit is the full centred fit.
        ++not_dense;
        const auto full = predict_all(fit_centered(pj.moments, kTol), pj.hx);
        t.max_into(limit_gap, std::abs(sweep.back().error -
                                       weighted_squared_error(pj.moments, pj.oracle, full)));
      }
    }
  }
  t.require(increase <= 1e-12, "e(n) increases by " + fmt(increase));
  t.require(centred_final <= 1e-8, "centred e(rank) " + fmt(centred_final));
  t.require(uncentred_final <= 1e-8, "uncentred e(rank) " + fmt(uncentred_final));
  t.require(limit_gap <= 1e-10, "limit gap " + fmt(limit_gap));
  return t.finish("max increase " + fmt(increase) + ", centred e(rank) " + fmt(centred_final) +
                  ", uncentred e(rank) " + fmt(uncentred_final) + " over " + std::to_string(dense) +
                  " dense joints; " + std::to_string(not_dense) + " non-dense joints reach the full fit within " +
                  fmt(limit_gap));
}

Outcome weak_identity() {
  Tracker t;
  int strong_failures = 0;
  double weak = 0.0, worst_strong = 0.0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const PreparedJoint pj = prepare(corpus_joint(CorpusId::rank_deficient_kernel, seed), kTol);
    const Matrix pred = predict_all(fit_centered(pj.moments, kTol), pj.hx);
    const double strong = max_pointwise_error(pj.oracle, pred);
    if (strong <= 1e-4) continue;
    ++strong_failures;
    worst_strong = std::max(worst_strong, strong);
    t.max_into(weak, weak_identity_check(pj.moments, pj.oracle, pred));
  }
  t.require(strong_failures > 0, "no joint breaks the strong identity");
  t.require(weak <= 1e-10, "weak residual " + fmt(weak));
  return t.finish(std::to_string(strong_failures) + " joints with strong mismatch up to " +
                  fmt(worst_strong) + ", weak residual " + fmt(weak));
}

Outcome bridge() {
  Tracker t;
  double mean = 0.0, cov = 0.0;
  int flags = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const PreparedJoint pj = prepare(corpus_joint(CorpusId::fullrank_random, seed), kTol);
    const BridgeReport br = verify_bridge(pj.spec.joint, pj.moments, kTol);
    t.max_into(mean, br.mean_error);
    t.max_into(cov, br.cov_error);
    flags += br.flags_agree ? 1 : 0;
  }
  t.require(mean <= 1e-8, "mean error " + fmt(mean));
  t.require(cov <= 1e-8, "covariance error " + fmt(cov));
  t.require(flags == 100, "flags agree on " + std::to_string(flags) + "/100");
  return t.finish("mean " + fmt(mean) + ", covariance " + fmt(cov) + ", flags agree " +
                  std::to_string(flags) + "/100");
}

Outcome oblique() {
  Tracker t;
  double residual = 0.0, norm_gap = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const PreparedJoint pj = prepare(corpus_joint(CorpusId::fullrank_random, seed), kTol);
    const GaussianJoint gj = bridge_from_moments(pj.moments);
    t.require(is_compatible(gj, kTol).included, "joint " + std::to_string(seed) + " incompatible");
    t.max_into(residual, projection_residuals(gj, oblique_projection(gj, kTol), kTol).max());
  }
  for (Eigen::Index n : {4, 8, 16})
    t.max_into(norm_gap, std::abs(incompatible_example(n, kTol).q_hat_norm - static_cast<double>(n)));
  t.require(residual <= 1e-10, "defining residual " + fmt(residual));
  t.require(norm_gap <= 1e-8, "||Q-hat|| - n " + fmt(norm_gap));
  return t.finish("max residual " + fmt(residual) + ", ||Q-hat|| - n " + fmt(norm_gap));
}

Outcome empirical() {
  Tracker t;
  double form_gap = 0.0, inclusion = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PreparedJoint pj = prepare(corpus_joint(CorpusId::fullrank_random, seed), kTol);
    for (std::size_t count : {100, 400, 1600}) {
      const SampleSet s = draw_samples(pj.spec.joint, count, seed);
      const EmpiricalMoments e = empirical_moments(s, pj.hx, pj.gy);
      const double eps = 1.0 / std::sqrt(static_cast<double>(count));
      for (Eigen::Index x = 0; x < pj.spec.joint.m(); ++x) {
        const Vector phi = pj.hx.feature(x);
        t.max_into(form_gap, (regularized_cme(e, eps, phi) - regularized_cme_gram(s, pj.hx, pj.gy, eps, phi)).norm());
      }
      t.max_into(inclusion, covariance_range_included(e.moments.c_xy, e.moments.c_x, e.moments.c_y, kTol).residual);
    }
  }
  const PreparedJoint pj = prepare(corpus_joint(CorpusId::fullrank_random, 0), kTol);
  std::vector<std::uint64_t> seeds(10);
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = i;
  EstimatorConfig config;
  const auto summary = summarize(convergence_study(pj.spec.joint, pj.hx, pj.gy, config, {100, 6400}, seeds));
  const double ratio = summary.front().mean / summary.back().mean;
  t.require(form_gap <= 1e-8, "Gram vs operator " + fmt(form_gap));
  t.require(inclusion <= 1e-10, "naive inclusion residual " + fmt(inclusion));
  t.require(ratio > 3.0, "error ratio " + fmt(ratio));
  return t.finish("Gram vs operator " + fmt(form_gap) + ", inclusion " + fmt(inclusion) +
                  ", err(100)/err(6400) " + fmt(ratio));
}

Outcome spectrum() {
  Tracker t;
  SpectrumResult mean;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SpectrumResult r = spectrum_experiment(500, 2000, seed, EntryDistribution::normal);
    mean.lambda_min += r.lambda_min / 5.0;
    mean.lambda_max += r.lambda_max / 5.0;
  }
  t.require(mean.lambda_min >= 0.15 && mean.lambda_min <= 0.35, "mean lambda_min " + fmt(mean.lambda_min));
  t.require(mean.lambda_max >= 2.05 && mean.lambda_max <= 2.45, "mean lambda_max " + fmt(mean.lambda_max));
  return t.finish("mean lambda_min " + fmt(mean.lambda_min) + " (limit 0.25), lambda_max " +
                  fmt(mean.lambda_max) + " (limit 2.25)");
}

Outcome kernel_hypotheses_check() {
  Tracker t;
  const Vector uniform = Vector::Constant(5, 0.2);
  t.require(kernel_hypotheses(Matrix::Identity(5, 5), uniform, kTol).characteristic, "delta Gram not characteristic");
  t.require(!kernel_hypotheses(Matrix::Ones(5, 5), uniform, kTol).characteristic, "ones Gram characteristic");
  testing::Rng rng(2024);
  int violations = 0, universal = 0, characteristic = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = testing::random_size(rng, 2, 9);
    const Eigen::Index rank = testing::random_size(rng, 1, n);
    const Matrix g = trial % 4 == 0 ? Matrix(Matrix::Ones(n, n) + testing::random_psd(rng, n, rank))
                                    : testing::random_psd(rng, n, rank);
    const KernelHypothesisReport r = kernel_hypotheses(g, testing::random_weights(rng, n, trial % 2 == 1), kTol);
    universal += r.l2_universal;
    characteristic += r.characteristic;
    const bool ok = (!r.l2_universal || r.characteristic) && (!r.characteristic || r.hc_dense) &&
                    (!r.h_dense || r.hc_dense);
    violations += ok ? 0 : 1;
  }
  t.require(violations == 0, std::to_string(violations) + " implication violations");
  return t.finish("200 Grams, " + std::to_string(universal) + " universal, " + std::to_string(characteristic) +
                  " characteristic, 0 violations");
}

struct Criterion {
  const char *name;
  double budget_s; // 0 means no runtime bound
  std::function<Outcome()> run;
};

} // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"AC1 oracle equivalence", 10, oracle_equivalence},
      {"AC2 pathology reproduction", 0, pathology},
      {"AC3 truncation convergence", 0, truncation},
      {"AC4 weak identity", 0, weak_identity},
      {"AC5 gaussian bridge", 0, bridge},
      {"AC6 oblique projections", 0, oblique},
      {"AC7 empirical consistency", 60, empirical},
      {"AC8 spectrum limits", 30, spectrum},
      {"AC9 kernel hypotheses", 0, kernel_hypotheses_check},
  };
  int failures = 0;
  for (const auto &c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.ok = false;
      o.detail += "; runtime " + fmt(secs) + " s over " + fmt(c.budget_s) + " s";
    }
    failures += o.ok ? 0 : 1;
    std::printf("%s %s: %s [%.2f s]\n", o.ok ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
