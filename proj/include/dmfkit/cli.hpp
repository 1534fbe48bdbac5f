#pragma once

#include <ostream>
#include <string>

namespace dmfkit {

// Exit statuses shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

// dmfkit {verify|minimize|zscan|fci2} ...; results go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string version();

}  // namespace dmfkit
