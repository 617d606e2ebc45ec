#include "cmekit/report.hpp"

#include "cmekit/io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace cmekit {

std::string to_string(CheckStatus status) {
  switch (status) {
  case CheckStatus::pass: return "pass";
  case CheckStatus::fail: return "fail";
  case CheckStatus::expected_failure: return "expected-failure";
  case CheckStatus::skipped: return "skipped";
  }
  return "unknown";
}

void RunReport::expect_le(std::string name, double residual, double tolerance, std::string detail) {
  const bool ok = std::isfinite(residual) && residual <= tolerance;
  checks.push_back({std::move(name), ok ? CheckStatus::pass : CheckStatus::fail, residual, tolerance,
                    std::move(detail)});
}

void RunReport::expect_true(std::string name, bool ok, std::string detail) {
  checks.push_back({std::move(name), ok ? CheckStatus::pass : CheckStatus::fail, ok ? 0.0 : 1.0, 0.0,
                    std::move(detail)});
}

bool RunReport::passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const Check &c) { return c.status == CheckStatus::fail; });
}

std::size_t RunReport::count(CheckStatus status) const {
  return static_cast<std::size_t>(std::count_if(
      checks.begin(), checks.end(), [status](const Check &c) { return c.status == status; }));
}

std::string RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["suite"] = suite;
  j["status"] = passed() ? "pass" : "fail";
  j["environment"] = {{"seed", seed}, {"version", kVersion}};
  j["tolerance"] = {{"rtol", tol.rtol}, {"atol", tol.atol}};
  if (elapsed_ms) j["timing"] = {{"elapsed_ms", *elapsed_ms}};
  j["summary"] = {{"pass", count(CheckStatus::pass)},
                  {"fail", count(CheckStatus::fail)},
                  {"expected_failure", count(CheckStatus::expected_failure)},
                  {"skipped", count(CheckStatus::skipped)}};
  auto arr = nlohmann::ordered_json::array();
  for (const auto &c : checks) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["status"] = to_string(c.status);
    e["residual"] = c.residual;
    e["tolerance"] = c.tolerance;
    if (!c.detail.empty()) e["detail"] = c.detail;
    arr.push_back(std::move(e));
  }
  j["checks"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::string RunReport::to_csv() const {
  std::ostringstream out;
  out << "name,status,residual,tolerance,detail\n";
  for (const auto &c : checks)
    out << csv_row({c.name, to_string(c.status), format_double(c.residual),
                    format_double(c.tolerance), c.detail});
  return out.str();
}

} // namespace cmekit
