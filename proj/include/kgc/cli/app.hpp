#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kgc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Parses and dispatches one command line (args[0] is the program name).
/// Results go to `out`, logs and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kgc::cli
