#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace trafficbp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

inline constexpr unsigned long long kDefaultSeed = 20070601ULL;

/// Runs one subcommand. `args` excludes the program name. Data goes to files
/// named by -o (or `out` for "-o -"); logs go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace trafficbp::cli
