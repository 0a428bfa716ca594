#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace noisemix {

/// Exit statuses of the command-line front-end.
enum ExitStatus : int { exit_ok = 0, exit_invalid = 1, exit_numerical = 2 };

/// Runs one subcommand (`args` excludes the program name). Tables go to
/// `out` unless an output path is given; diagnostics go to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace noisemix
