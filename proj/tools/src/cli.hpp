#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace agricurate::cli {

// Exit codes: 0 success, 1 stage failure, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Runs one subcommand. `args` excludes the program name. Structured log
// records and errors go to `err`, help and version text to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace agricurate::cli
