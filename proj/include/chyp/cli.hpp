#pragma once

#include <complex>
#include <ostream>
#include <string>
#include <vector>

#include "chyp/common.hpp"

namespace chyp::cli {

enum ExitCode : int {
    kSuccess = 0,
    kValidation = 2,
    kNumeric = 3,
    kDiagnostic = 4,
};

/// Runs the command line `args` (without the program name), writing results
/// to `out` and diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "0.5+0.1i,0,-i" into a complex vector.
CVec parse_complex_list(const std::string& text);

}  // namespace chyp::cli
