#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace paretoscope {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitInvalidInput = 2,
  kExitInfeasible = 3,
  kExitSpawnFailure = 4,
};

/// Entry point of the `paretoscope` tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace paretoscope
