#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hardthresh::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

// Runs the command line front end. `args` excludes the program name.
// Human-readable tables go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hardthresh::cli
