#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scb::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kOk = 0,
    kFailure = 1,      ///< numerical failure or anything unexpected
    kBadInput = 2,     ///< unparsable input, invalid flag or config value
    kDegenerate = 3,   ///< too few curves, zero variance, ...
    kIllPosed = 4,     ///< bandwidth too small for the design
};

/// Runs one invocation. `args` excludes the program name. Summaries go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scb::cli
