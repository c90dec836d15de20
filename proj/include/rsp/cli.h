#pragma once

#include <ostream>

namespace rsp {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitVerificationFailed = 1,
  kExitIoOrSchema = 2,
  kExitPrecondition = 3,
};

/// Entry point of the `rsp` tool. JSON reports go to `out`, human-readable
/// summaries and errors to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rsp
