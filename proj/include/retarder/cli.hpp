// Command-line front end: design, verify, eval, sweep, compare.
#pragma once

#include <iosfwd>

namespace retarder::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;      // verify: some row missed a threshold
inline constexpr int kExitUsage = 2;       // bad arguments or unreadable input
inline constexpr int kExitNoSolution = 3;  // design: nothing converged

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace retarder::cli
