#include "cmekit/cme.hpp"
#include "cmekit/corpus.hpp"
#include "cmekit/error.hpp"
#include "generators.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace cmekit {
namespace {

const Tolerance kTol = Tolerance::pipeline();

PreparedJoint delta_joint() {
  const FiniteJoint j(index_labels(2), index_labels(2), Matrix{{0.3, 0.1}, {0.2, 0.4}});
  return prepare({j, Kernel::delta(), Kernel::delta()}, kTol);
}

PreparedJoint corpus_member(CorpusId id, std::uint64_t seed) {
  return prepare(corpus_joint(id, seed), kTol);
}

/// C_X = 0 with a nonzero cross block; not the moments of any joint.
Moments zero_covariance_moments() {
  Moments mo;
  mo.mu_x = Vector::Zero(2);
  mo.mu_y = Vector::Zero(2);
  mo.c_x = Matrix::Zero(2, 2);
  mo.c_y = Matrix::Identity(2, 2);
  mo.c_xy = Matrix::Identity(2, 2);
  mo.uc_x = mo.c_x;
  mo.uc_y = mo.c_y;
  mo.uc_xy = mo.c_xy;
  return mo;
}

TEST(Assumptions, IndependentJointSatisfiesC) {
  const PreparedJoint pj = corpus_member(CorpusId::independence, 1);
  const AssumptionReport r = check_assumptions(pj.moments, pj.kernel_x_report, kTol);
  EXPECT_TRUE(r.assumption_c);
  EXPECT_TRUE(r.hierarchy_consistent);
}

TEST(Assumptions, FullRankJointSatisfiesBothInclusions) {
  const PreparedJoint pj = corpus_member(CorpusId::fullrank_random, 2);
  const AssumptionReport r = check_assumptions(pj.moments, pj.kernel_x_report, kTol);
  EXPECT_TRUE(r.assumption_c);
  EXPECT_TRUE(r.assumption_cuu);
  EXPECT_LE(r.assumption_c_residual, 1e-12);
  EXPECT_LE(r.assumption_cuu_residual, 1e-12);
  EXPECT_TRUE(r.assumption_a);
  EXPECT_TRUE(r.assumption_b);
}

TEST(Assumptions, ZeroCovarianceWithCrossBlockFailsC) {
  const AssumptionReport r = check_assumptions(zero_covariance_moments(), KernelHypothesisReport{}, kTol);
  EXPECT_FALSE(r.assumption_c);
  EXPECT_FALSE(r.assumption_cuu);
}

TEST(Assumptions, FlagMatchesLeastSquaresSolvability) {
  // C_X h = C_XY g has an exact least-squares solution for every basis g
  // exactly when the inclusion flag is set
  auto solvable = [](const Moments &mo) {
    const Matrix h = pinv(mo.c_x, kTol) * mo.c_xy;
    const double scale = std::max(mo.c_xy.norm(), 1e-300);
    return (mo.c_x * h - mo.c_xy).norm() <= 1e-9 * std::max(scale, 1.0);
  };
  const Moments bad = zero_covariance_moments();
  EXPECT_EQ(solvable(bad), check_assumptions(bad, {}, kTol).assumption_c);
  for (auto id : {CorpusId::fullrank_random, CorpusId::rank_deficient_kernel, CorpusId::pointmass,
                  CorpusId::deterministic_map}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const PreparedJoint pj = corpus_member(id, seed);
      EXPECT_EQ(solvable(pj.moments),
                check_assumptions(pj.moments, pj.kernel_x_report, kTol).assumption_c);
    }
  }
}

TEST(FitCentered, IndependentJointHasZeroOperator) {
  const PreparedJoint pj = corpus_member(CorpusId::independence, 3);
  const CenteredCmeOperator op = fit_centered(pj.moments, kTol);
  EXPECT_LE(op.a.norm(), 1e-14);
  for (Eigen::Index x = 0; x < pj.spec.joint.m(); ++x)
    EXPECT_LE(mmd(predict_centered(op, pj.hx.feature(x)), pj.moments.mu_y), 1e-12);
}

TEST(FitCentered, DeltaJointReproducesOracle) {
  const PreparedJoint pj = delta_joint();
  const CenteredCmeOperator op = fit_centered(pj.moments, kTol);
  EXPECT_LE(max_pointwise_error(pj.oracle, predict_all(op, pj.hx)), 1e-10);
  EXPECT_LE((predict_centered(op, pj.hx.feature(0)) - Vector{{0.75, 0.25}}).norm(), 1e-10);
}

TEST(FitCentered, RefusesWhenRangeInclusionFails) {
  EXPECT_THROW(fit_centered(zero_covariance_moments(), kTol), RangeInclusionViolated);
  EXPECT_THROW(fit_uncentered(zero_covariance_moments(), kTol), RangeInclusionViolated);
}

TEST(PredictCentered, AnchorMapsToMeanAndChecksShape) {
  const PreparedJoint pj = corpus_member(CorpusId::fullrank_random, 4);
  const CenteredCmeOperator op = fit_centered(pj.moments, kTol);
  EXPECT_EQ(predict_centered(op, pj.moments.mu_x), pj.moments.mu_y);
  EXPECT_THROW(predict_centered(op, Vector::Zero(pj.hx.rank + 1)), DimensionMismatch);
}

TEST(FitUncentered, DeltaJointReproducesOracle) {
  const PreparedJoint pj = delta_joint();
  const UncenteredCmeOperator op = fit_uncentered(pj.moments, kTol);
  EXPECT_LE(max_pointwise_error(pj.oracle, predict_all(op, pj.hx)), 1e-10);
  EXPECT_THROW(predict_uncentered(op, Vector::Zero(5)), DimensionMismatch);
}

TEST(FitUncentered, PointMassPredictsItsAtom) {
  const PreparedJoint pj = corpus_member(CorpusId::pointmass, 5);
  Eigen::Index x0, y0;
  pj.spec.joint.p().maxCoeff(&x0, &y0);
  const UncenteredCmeOperator op = fit_uncentered(pj.moments, kTol);
  EXPECT_LE(mmd(predict_uncentered(op, pj.hx.feature(x0)), pj.gy.feature(y0)), 1e-12);
  EXPECT_LE(marginal_consistency(op, pj.moments), 1e-15);
}

TEST(ClassicalCme, IndependentJointCollapsesToZero) {
  const PreparedJoint pj = corpus_member(CorpusId::independence, 6);
  ASSERT_GE(pj.moments.mu_y.norm(), 0.1);
  for (Eigen::Index x = 0; x < pj.spec.joint.m(); ++x) {
    const ClassicalResult r = classical_cme(pj.moments, pj.hx.feature(x), kTol);
    EXPECT_LE(r.output.norm(), 1e-10);
    EXPECT_GE(mmd(r.output, pj.moments.mu_y), 0.1);
  }
}

TEST(ClassicalCme, ReportsSingularCovarianceForFullRankGram) {
  const PreparedJoint pj = corpus_member(CorpusId::fullrank_random, 7);
  const ClassicalResult r = classical_cme(pj.moments, pj.hx.feature(0), kTol);
  EXPECT_TRUE(r.cx_singular);
  EXPECT_EQ(r.cx_rank, pj.hx.rank - 1);
  EXPECT_FALSE(r.query_in_range);
}

TEST(ClassicalCme, DifferenceMatchesCentredFormula) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PreparedJoint pj = corpus_member(CorpusId::fullrank_random, seed);
    const CenteredCmeOperator op = fit_centered(pj.moments, kTol);
    const Vector base = classical_cme(pj.moments, pj.moments.mu_x, kTol).output;
    for (Eigen::Index x = 0; x < pj.spec.joint.m(); ++x) {
      const Vector phi = pj.hx.feature(x);
      const Vector lhs = classical_cme(pj.moments, phi, kTol).output - base;
      EXPECT_LE((lhs - (predict_centered(op, phi) - pj.moments.mu_y)).norm(), 1e-10);
    }
  }
}

TEST(FitTruncated, FullRankEqualsUntruncatedFit) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PreparedJoint pj = corpus_member(CorpusId::fullrank_random, seed);
    const TruncatedCme tc = fit_truncated(pj.moments, pj.hx.rank, CmeVariant::centred, kTol);
    const TruncatedCme tu = fit_truncated(pj.moments, pj.hx.rank, CmeVariant::uncentred, kTol);
    const Matrix c = predict_all(fit_centered(pj.moments, kTol), pj.hx);
    const Matrix u = predict_all(fit_uncentered(pj.moments, kTol), pj.hx);
    EXPECT_LE((predict_all(tc, pj.hx) - c).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((predict_all(tu, pj.hx) - u).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE(tc.range_residual, 1e-10);
  }
}

TEST(FitTruncated, RankOneOnIndependentJointIsMarginal) {
  const PreparedJoint pj = corpus_member(CorpusId::independence, 8);
  const TruncatedCme op = fit_truncated(pj.moments, 1, CmeVariant::centred, kTol);
  for (Eigen::Index x = 0; x < pj.spec.joint.m(); ++x)
    EXPECT_LE(mmd(predict_truncated(op, pj.hx.feature(x)), pj.moments.mu_y), 1e-12);
}

TEST(FitTruncated, RankBounds) {
  const PreparedJoint pj = corpus_member(CorpusId::fullrank_random, 9);
  EXPECT_THROW(fit_truncated(pj.moments, 0, CmeVariant::centred, kTol), RankOutOfBounds);
  EXPECT_THROW(fit_truncated(pj.moments, pj.hx.rank + 1, CmeVariant::centred, kTol), RankOutOfBounds);
}

TEST(FitTruncated, UncentredBasisOptionAlsoConverges) {
  const PreparedJoint pj = corpus_member(CorpusId::fullrank_random, 10);
  const auto sweep = truncation_sweep(pj.moments, pj.oracle, CmeVariant::uncentred, kTol,
                                      TruncationBasis::uncentred_covariance);
  EXPECT_LE(sweep.back().error, 1e-8);
}

TEST(FitTruncated, MatchesWeightedLeastSquaresProjection) {
  // the centred rank-n fit of f_g is the p_X-weighted least-squares
  // projection of the centred f_g onto the centred span of the first n
  // eigenvectors of C_X
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PreparedJoint pj = corpus_member(CorpusId::fullrank_random, seed);
    const Moments &mo = pj.moments;
    const Vector px = pj.spec.joint.px();
    const Vector sw = px.cwiseSqrt();
    const auto eig = sym_eig(mo.c_x, kTol);
    const Eigen::Index rank_cx = numerical_rank(mo.c_x, kTol);
    for (Eigen::Index n = 1; n <= rank_cx; ++n) {
      const TruncatedCme op = fit_truncated(mo, n, CmeVariant::centred, kTol);
      const Matrix un = eig.vectors.leftCols(n);
      // design: scores u_k^T (phi(x) - mu_X), one row per x
      const Matrix centred_features = pj.hx.coords.colwise() - mo.mu_x;
      const Matrix design = (un.transpose() * centred_features).transpose();
      for (Eigen::Index k = 0; k < pj.gy.rank; ++k) {
        const Vector g = Vector::Unit(pj.gy.rank, k);
        const Vector fg = f_g(pj.spec.joint, pj.gy, g);
        const Vector target = fg - Vector::Constant(fg.size(), px.dot(fg));
        const Vector c = (sw.asDiagonal() * design).colPivHouseholderQr().solve(sw.asDiagonal() * target);
        const Vector h_ls = un * c;
        const Vector h_fit = op.a_n.transpose() * g;
        EXPECT_LE((h_fit - h_ls).norm(), 1e-8) << "seed " << seed << " n " << n;
      }
    }
  }
}

double max_increase(const std::vector<SweepPoint> &sweep) {
  double worst = 0.0;
  for (std::size_t i = 1; i < sweep.size(); ++i) worst = std::max(worst, sweep[i].error - sweep[i - 1].error);
  return worst;
}

TEST(TruncationSweep, MonotoneOnEveryCorpus) {
  for (auto id : {CorpusId::independence, CorpusId::fullrank_random, CorpusId::deterministic_map,
                  CorpusId::rank_deficient_kernel, CorpusId::pointmass}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const PreparedJoint pj = corpus_member(id, seed);
      const auto sweep = truncation_sweep(pj.moments, pj.oracle, CmeVariant::centred, kTol);
      ASSERT_EQ(static_cast<Eigen::Index>(sweep.size()), pj.hx.rank);
      EXPECT_LE(max_increase(sweep), 1e-12) << corpus_name(id) << " seed " << seed;
    }
  }
}

TEST(TruncationSweep, IndependentJointIsZeroEverywhere) {
  const PreparedJoint pj = corpus_member(CorpusId::independence, 11);
  for (const auto &p : truncation_sweep(pj.moments, pj.oracle, CmeVariant::centred, kTol))
    EXPECT_LE(p.error, 1e-24);
}

TEST(TruncationSweep, FullRankReachesOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PreparedJoint pj = corpus_member(CorpusId::fullrank_random, seed);
    EXPECT_LE(truncation_sweep(pj.moments, pj.oracle, CmeVariant::centred, kTol).back().error, 1e-8);
    EXPECT_LE(truncation_sweep(pj.moments, pj.oracle, CmeVariant::uncentred, kTol).back().error, 1e-8);
  }
}

TEST(TruncationSweep, RankDeficientPlateauIsLeastSquaresError) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PreparedJoint pj = corpus_member(CorpusId::rank_deficient_kernel, seed);
    const Vector px = pj.spec.joint.px();
    const Vector sw = px.cwiseSqrt();
    // best affine-in-phi(x) predictor of mu_{Y|X=x} under p_X weights
    Matrix design(pj.spec.joint.m(), pj.hx.rank + 1);
    design.col(0).setOnes();
    design.rightCols(pj.hx.rank) = pj.hx.coords.transpose();
    const Matrix targets = pj.oracle.means.transpose();
    const Matrix wd = sw.asDiagonal() * design;
    // the constant lies in the feature span, so the design is rank deficient
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(wd.rows(), wd.cols());
    cod.setThreshold(1e-10);
    const Matrix coef = cod.compute(wd).solve(sw.asDiagonal() * targets);
    const double plateau = (wd * coef - sw.asDiagonal() * targets).squaredNorm();
    ASSERT_GT(plateau, 1e-6);
    const auto sweep = truncation_sweep(pj.moments, pj.oracle, CmeVariant::centred, kTol);
    EXPECT_NEAR(sweep.back().error, plateau, 1e-10) << "seed " << seed;
  }
}

TEST(WeakIdentity, HoldsWhereStrongIdentityFails) {
  int strong_failures = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PreparedJoint pj = corpus_member(CorpusId::rank_deficient_kernel, seed);
    const Matrix c = predict_all(fit_centered(pj.moments, kTol), pj.hx);
    const Matrix u = predict_all(fit_uncentered(pj.moments, kTol), pj.hx);
    if (max_pointwise_error(pj.oracle, c) > 1e-4) ++strong_failures;
    EXPECT_LE(weak_identity_check(pj.moments, pj.oracle, c), 1e-10);
    EXPECT_LE(weak_identity_check(pj.moments, pj.oracle, u), 1e-10);
  }
  EXPECT_EQ(strong_failures, 20);
}

TEST(WeakIdentity, FullRankAndIndependentJoints) {
  const PreparedJoint full = corpus_member(CorpusId::fullrank_random, 12);
  EXPECT_LE(weak_identity_check(full.moments, full.oracle,
                                predict_all(fit_centered(full.moments, kTol), full.hx)),
            1e-10);
  const PreparedJoint ind = corpus_member(CorpusId::independence, 12);
  EXPECT_LE(weak_identity_check(ind.moments, ind.oracle,
                                predict_all(fit_centered(ind.moments, kTol), ind.hx)),
            1e-15);
}

TEST(MarginalConsistency, FullRankAndTruncations) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PreparedJoint pj = corpus_member(CorpusId::fullrank_random, seed);
    EXPECT_LE(marginal_consistency(fit_uncentered(pj.moments, kTol), pj.moments), 1e-10);
    const TruncatedCme full = fit_truncated(pj.moments, pj.hx.rank, CmeVariant::uncentred, kTol);
    EXPECT_LE(marginal_consistency(full, pj.moments), 1e-10);
  }
}

TEST(ErrorMetrics, OffSupportColumnsIgnored) {
  const FiniteJoint j(index_labels(3), index_labels(2), Matrix{{0.5, 0.0}, {0.0, 0.0}, {0.0, 0.5}});
  const PreparedJoint pj = prepare({j, Kernel::gaussian(0.5), Kernel::gaussian(0.5)}, kTol);
  Matrix pred = pj.oracle.means;
  pred.col(1).setConstant(100.0);
  EXPECT_EQ(max_pointwise_error(pj.oracle, pred), 0.0);
  EXPECT_EQ(weighted_squared_error(pj.moments, pj.oracle, pred), 0.0);
}

} // namespace
} // namespace cmekit
