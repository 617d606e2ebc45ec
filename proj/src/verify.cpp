#include "cmekit/verify.hpp"

#include "cmekit/cme.hpp"
#include "cmekit/error.hpp"
#include "cmekit/gaussian.hpp"

#include <algorithm>
#include <limits>
#include <optional>

namespace cmekit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Pass when the hypothesis holds and the residual is small. Without the
/// hypothesis a small residual still passes and a large one is recorded as
/// an expected failure.
Check gated(std::string name, bool hypothesis, double residual, double tolerance,
            const char *hypothesis_name) {
  Check c{std::move(name), CheckStatus::pass, residual, tolerance, {}};
  if (residual <= tolerance) return c;
  if (hypothesis) {
    c.status = CheckStatus::fail;
  } else {
    c.status = CheckStatus::expected_failure;
    c.detail = std::string(hypothesis_name) + " does not hold";
  }
  return c;
}

double max_increase(const std::vector<SweepPoint> &sweep) {
  double worst = 0.0;
  for (std::size_t i = 1; i < sweep.size(); ++i)
    worst = std::max(worst, sweep[i].error - sweep[i - 1].error);
  return worst;
}

double max_column_distance(const Matrix &a, const Matrix &b, const std::vector<bool> &on_support) {
  double worst = 0.0;
  for (Eigen::Index x = 0; x < a.cols(); ++x)
    if (on_support[static_cast<std::size_t>(x)])
      worst = std::max(worst, mmd(a.col(x), b.col(x)));
  return worst;
}

} // namespace

void verify_joint(RunReport &report, const JointSpec &spec, const std::string &prefix,
                  const VerifyOptions &opt) {
  const PreparedJoint pj = prepare(spec, opt.tol);
  const Moments &mo = pj.moments;
  const AssumptionReport as = check_assumptions(mo, pj.kernel_x_report, opt.tol);
  const auto name = [&](const char *check) { return prefix + check; };

  report.expect_true(name("assumption_hierarchy"), as.hierarchy_consistent);
  report.add({name("assumption_c"), as.assumption_c ? CheckStatus::pass : CheckStatus::fail,
              as.assumption_c_residual, opt.tol.rtol, {}});

  std::optional<CenteredCmeOperator> centred;
  try {
    centred = fit_centered(mo, opt.tol);
  } catch (const RangeInclusionViolated &e) {
    report.add({name("centred_fit"), CheckStatus::fail, kInf, opt.tol.rtol, e.what()});
  }
  std::optional<UncenteredCmeOperator> uncentred;
  try {
    uncentred = fit_uncentered(mo, opt.tol);
  } catch (const RangeInclusionViolated &e) {
    report.add({name("uncentred_fit"), CheckStatus::fail, kInf, opt.tol.rtol, e.what()});
  }

  if (centred) {
    const Matrix pred = predict_all(*centred, pj.hx);
    report.add(gated(name("centred_oracle"), as.assumption_b, max_pointwise_error(pj.oracle, pred),
                     opt.check_tol, "H_C density"));
    report.expect_le(name("centred_weak_identity"), weak_identity_check(mo, pj.oracle, pred),
                     opt.weak_tol);
  }
  if (uncentred) {
    const Matrix pred = predict_all(*uncentred, pj.hx);
    report.add(gated(name("uncentred_oracle"), as.assumption_a, max_pointwise_error(pj.oracle, pred),
                     opt.check_tol, "H density"));
    report.expect_le(name("uncentred_weak_identity"), weak_identity_check(mo, pj.oracle, pred),
                     opt.weak_tol);
    report.add(gated(name("marginal_consistency"), as.assumption_a, marginal_consistency(*uncentred, mo),
                     opt.check_tol, "H density"));
  }

  if (is_independent(spec.joint) && centred) {
    double centred_gap = 0.0;
    double classical_norm = 0.0;
    double classical_gap = 0.0;
    for (Eigen::Index x = 0; x < spec.joint.m(); ++x) {
      if (!pj.oracle.on_support[static_cast<std::size_t>(x)]) continue;
      const Vector phi = pj.hx.feature(x);
      centred_gap = std::max(centred_gap, mmd(predict_centered(*centred, phi), mo.mu_y));
      const Vector classical = classical_cme(mo, phi, opt.tol).output;
      classical_norm = std::max(classical_norm, classical.norm());
      classical_gap = std::max(classical_gap, mmd(classical, mo.mu_y));
    }
    report.expect_le(name("pathology_centred"), centred_gap, opt.pathology_tol);
    Check classical{name("pathology_classical"), CheckStatus::pass, classical_gap, opt.check_tol, {}};
    if (classical_gap > opt.check_tol) {
      // the classical formula collapses to 0 instead of mu_Y
      classical.status = classical_norm <= 1e-10 ? CheckStatus::expected_failure : CheckStatus::fail;
      classical.detail = "classical output norm " + std::to_string(classical_norm);
    }
    report.add(std::move(classical));
  }

  if (pj.hx.rank > 0) {
    const auto sweep = truncation_sweep(mo, pj.oracle, CmeVariant::centred, opt.tol);
    report.expect_le(name("truncation_monotone"), max_increase(sweep), 1e-12);
    report.add(gated(name("truncation_centred_final"), as.assumption_b, sweep.back().error,
                     opt.check_tol, "H_C density"));
    const auto usweep = truncation_sweep(mo, pj.oracle, CmeVariant::uncentred, opt.tol);
    report.add(gated(name("truncation_uncentred_final"), as.assumption_a, usweep.back().error,
                     opt.check_tol, "H density"));
    if (centred) {
      const TruncatedCme full = fit_truncated(mo, pj.hx.rank, CmeVariant::centred, opt.tol);
      report.expect_le(name("truncation_limit"),
                       max_column_distance(predict_all(full, pj.hx), predict_all(*centred, pj.hx),
                                           pj.oracle.on_support),
                       opt.check_tol);
    }
  }

  const BridgeReport bridge = verify_bridge(spec.joint, mo, opt.tol);
  report.add(gated(name("bridge_mean"), as.assumption_b, bridge.mean_error, opt.check_tol,
                   "H_C density"));
  report.add(gated(name("bridge_covariance"), as.assumption_b, bridge.cov_error, opt.check_tol,
                   "H_C density"));
  report.expect_true(name("bridge_flags"), bridge.flags_agree,
                     bridge.compatible ? "compatible" : "incompatible");
}

RunReport verify_suite(const std::string &suite,
                       const std::vector<std::pair<std::string, JointSpec>> &joints,
                       const VerifyOptions &options) {
  RunReport report;
  report.suite = suite;
  report.tol = options.tol;
  for (const auto &[label, spec] : joints) verify_joint(report, spec, label + "/", options);
  return report;
}

} // namespace cmekit
