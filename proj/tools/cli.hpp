#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ksca::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kShortfall = 3, kIoError = 4 };

/// Runs the command line `args` (args[0] is the program name). Normal output
/// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ksca::cli
