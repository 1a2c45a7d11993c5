#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace phishguard {

/// Exit-code contract of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitBadArgs = 2,
    kExitDataError = 3,
    kExitTrainingError = 4,
};

struct CliStreams {
    std::ostream& out;
    std::ostream& err;
    std::istream& in;
    /// Human tables when true, JSON otherwise (unless --json forces JSON).
    bool stdout_is_tty = false;
};

/// Runs one invocation. `args[0]` is the program name.
int run_cli(std::span<const std::string> args, CliStreams io);

}  // namespace phishguard
