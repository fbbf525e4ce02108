// Batch driver behind the cascadelab binary.
//
// run() takes the argument vector without the program name, executes one
// subcommand, and returns the process exit status: 0 on success, 1 when a
// consistency verdict is negative, 2 on input errors.  Exposed as a library
// call so tests can drive subcommands in process.
#pragma once

#include <string>
#include <vector>

namespace cascadelab::cli {

int run(std::vector<std::string> const& args);

} // namespace cascadelab::cli
