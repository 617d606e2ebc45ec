#pragma once

#include "cmekit/linalg.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cmekit {

inline constexpr const char *kVersion = "0.1.0";

/// `expected_failure` marks a demonstration that a formula breaks where it
/// is supposed to; `skipped` marks a check whose hypotheses do not hold.
/// Neither fails the run.
enum class CheckStatus { pass, fail, expected_failure, skipped };

std::string to_string(CheckStatus status);

struct Check {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct RunReport {
  std::string suite;
  std::uint64_t seed = 0;
  Tolerance tol = Tolerance::pipeline();
  std::optional<double> elapsed_ms;
  std::vector<Check> checks;

  /// Pass when residual <= tolerance.
  void expect_le(std::string name, double residual, double tolerance, std::string detail = {});
  void expect_true(std::string name, bool ok, std::string detail = {});
  void add(Check check) { checks.push_back(std::move(check)); }

  bool passed() const;
  std::size_t count(CheckStatus status) const;

  std::string to_json() const;
  /// name,status,residual,tolerance,detail
  std::string to_csv() const;
};

} // namespace cmekit
