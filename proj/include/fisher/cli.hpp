#pragma once

#include <ostream>
#include <span>
#include <string>

namespace fisher {

/// Exit codes of the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Subcommands gen, run, reference and compare. `args` excludes the program
/// name.
int cli_main(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace fisher
