#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gbf::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kBadConfig = 2,   ///< bad flags, config, model file or range
  kBadData = 3,     ///< unreadable or inconsistent signals
  kTrainFailed = 4  ///< divergence or a singular Wiener-Hopf system
};

/// Runs `gbfilt <args...>` in-process; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gbf::cli
