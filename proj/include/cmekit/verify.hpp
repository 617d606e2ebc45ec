#pragma once

#include "cmekit/model.hpp"
#include "cmekit/report.hpp"

#include <string>
#include <utility>
#include <vector>

namespace cmekit {

struct VerifyOptions {
  Tolerance tol = Tolerance::pipeline();
  double check_tol = 1e-8;     // oracle, bridge and truncation limits
  double weak_tol = 1e-10;     // weak identity
  double pathology_tol = 1e-12; // centred prediction on independent joints
};

/// Appends the checks for one joint; check names are prefixed with `prefix`.
/// Checks that need density are recorded as skipped or expected-failure
/// when the density hypothesis is absent.
void verify_joint(RunReport &report, const JointSpec &spec, const std::string &prefix,
                  const VerifyOptions &options);

RunReport verify_suite(const std::string &suite,
                       const std::vector<std::pair<std::string, JointSpec>> &joints,
                       const VerifyOptions &options);

} // namespace cmekit
