#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace leap::cli {

enum ExitCode { ok = 0, validation = 2, numerical = 3, io = 4 };

/// Runs the command line `args` (without the program name). Primary output
/// goes to `out` unless --out names a file; errors are written to `err` as a
/// JSON document and mapped to an exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace leap::cli
