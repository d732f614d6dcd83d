#pragma once

#include <ostream>

namespace nsclust {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitNotConverged = 3;

/// Entry point of the `nsclust` command line tool (cluster, eval, gen, plot).
/// Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nsclust
