#pragma once

#include <iosfwd>

namespace mdm::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kParse = 3,
  kResource = 4,
  kNumerical = 5,
  kEngineMismatch = 6,
};

/// Runs the command line; never throws. Messages go to `err`, primary output
/// to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mdm::cli
