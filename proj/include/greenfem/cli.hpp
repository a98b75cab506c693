#pragma once

#include <string>
#include <vector>

namespace greenfem {

// Dispatch one command-line invocation.  Subcommands: solve, green,
// neumann-green, fundamental, verify, report.  Returns the process exit
// code: 0 on success, 1 when a requested check fails, 2 on usage or
// configuration errors.
int run_command(int argc, const char* const* argv);
int run_command(const std::vector<std::string>& args);

}  // namespace greenfem
