#include "cmekit/model.hpp"

#include <cmath>

namespace cmekit {

PreparedJoint prepare(const JointSpec &spec, const Tolerance &tol) {
  PreparedJoint pj{spec, {}, {}, {}, {}, {}, {}, {}};
  pj.gram_x = gram(spec.kernel_x, spec.joint.x_points());
  pj.gram_y = gram(spec.kernel_y, spec.joint.y_points());
  pj.hx = feature_coordinates(pj.gram_x, tol);
  pj.gy = feature_coordinates(pj.gram_y, tol);
  pj.moments = embed_moments(spec.joint, pj.hx, pj.gy);
  pj.oracle = build_oracle(spec.joint, pj.gy);
  pj.kernel_x_report = kernel_hypotheses(pj.gram_x, spec.joint.px(), tol);
  return pj;
}

bool is_independent(const FiniteJoint &joint) {
  const Matrix product = joint.px() * joint.py().transpose();
  return (joint.p() - product).cwiseAbs().maxCoeff() <= 1e-15;
}

} // namespace cmekit
