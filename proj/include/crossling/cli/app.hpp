/// @file app.hpp
/// @brief Command-line entry point, callable in-process for tests.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace crossling::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kFailure = 1,     ///< runtime error
    kUsage = 2,       ///< bad flags or config
    kIncomplete = 3,  ///< outputs written but some requested cells are missing
};

/// Runs one command. @p args excludes the program name. Normal output goes
/// to @p out, diagnostics to @p err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crossling::cli
