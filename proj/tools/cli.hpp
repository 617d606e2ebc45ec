#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cmekit::cli {

enum ExitCode : int { kPass = 0, kCheckFailure = 1, kInvalidSpec = 2 };

inline constexpr unsigned long long kDefaultSeed = 20240601ULL;

/// Runs `cmekit <args...>`. Output without --out goes to `out`; diagnostics
/// go to `err`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace cmekit::cli
