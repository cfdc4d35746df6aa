#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace sgeo::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailed = 1;  // axiom failure, invalid model, solver failure
inline constexpr int kUsage = 2;   // bad flags, unreadable or malformed input

/// Runs one command line (without the program name). Reports go to `out`
/// unless `--out` names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Copy of `j` with every floating-point number rounded to `digits`
/// significant digits.
nlohmann::json round_numbers(const nlohmann::json& j, int digits = 12);

}  // namespace sgeo::cli
