#pragma once

#include "cmekit/discrete.hpp"
#include "cmekit/kernels.hpp"

namespace cmekit {

/// A finite joint together with the kernels on X and Y.
struct JointSpec {
  FiniteJoint joint;
  Kernel kernel_x;
  Kernel kernel_y;
};

/// Everything derived from a JointSpec that the checks and commands share.
struct PreparedJoint {
  JointSpec spec;
  Matrix gram_x;
  Matrix gram_y;
  FeatureBasis hx;
  FeatureBasis gy;
  Moments moments;
  ConditionalOracle oracle;
  KernelHypothesisReport kernel_x_report;
};

PreparedJoint prepare(const JointSpec &spec, const Tolerance &tol);

/// p equals the product of its marginals to within 1e-15 per entry.
bool is_independent(const FiniteJoint &joint);

} // namespace cmekit
