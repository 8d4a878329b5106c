#pragma once

#include <iosfwd>

namespace lowlight {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitPartialFailure = 1,
  kExitUsage = 2,
};

/// Entry point shared by the executable and the tests. Reports go to `out`,
/// progress and diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lowlight
