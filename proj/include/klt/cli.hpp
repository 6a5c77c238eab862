#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace klt::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int
{
    kSuccess = 0,
    kUsageError = 2,
    kInvalidInput = 3,
    kCounterexample = 4,
};

/// Runs the command line `args` (without the program name). Output that the
/// user did not redirect with --output goes to `out`; diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace klt::cli
