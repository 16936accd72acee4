#ifndef RELUMIP_CLI_HPP_
#define RELUMIP_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace relumip {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitInfeasible = 4;
inline constexpr int kExitLimitIncumbent = 5;
inline constexpr int kExitLimitNoIncumbent = 6;

/// Runs one command. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace relumip

#endif  // RELUMIP_CLI_HPP_
