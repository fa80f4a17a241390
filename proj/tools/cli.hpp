#pragma once

#include <iosfwd>

namespace redq::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kInvalidInput = 2,
    kNotConverged = 3,
};

/// Parses the command line, runs the selected command and writes artifacts.
/// `out` receives the one-line JSON summary (or help text), `err` diagnostics.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace redq::cli
