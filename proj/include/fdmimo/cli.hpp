#pragma once

#include <string>
#include <vector>

namespace fdmimo {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalError = 3;
inline constexpr int kExitIoError = 4;

/// Entry point shared by the binary and the tests. argv excludes the program
/// name. Subcommands: solve, sweep, selfcheck.
int run_cli(const std::vector<std::string>& argv);

}  // namespace fdmimo
