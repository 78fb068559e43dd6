#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hazard::cli {

// Runs the command line `args` (args[0] is the program name) and returns
// the process exit status: 0 success, 1 user or input error, 2 internal
// invariant violation. Errors are reported on `err` as one
// `E_CODE: message` line.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

// Exit status for an exception escaping a command.
int ExitCodeFor(const std::exception& e);

}  // namespace hazard::cli
