#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace textcen {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInput = 2,
  kExitNotDominant = 3,
  kExitRuntime = 4,
};

/// Entry point of the `textcen` command. `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace textcen
