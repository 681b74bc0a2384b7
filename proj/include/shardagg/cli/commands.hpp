#pragma once

#include <ostream>

namespace shardagg::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitInfeasible = 1,
    kExitConfigError = 2,
    kExitInvariantViolation = 3,
};

// Entry point of the `shardagg` tool: parses argv and dispatches to the
// simulate, sweep, idle and verify subcommands. Normal output goes to
// `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace shardagg::cli
