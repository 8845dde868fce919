#pragma once

#include <iosfwd>

namespace absc {

/// Exit codes of the command-line tool.
enum ExitCode { kExitOk = 0, kExitSafetyFailure = 1, kExitUsage = 2 };

/// Subcommands: sample, synthesize, verify, simulate, report. Log level from ABSC_LOG.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace absc
