#pragma once

#include <string>
#include <vector>

namespace xfmr::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kIo = 2,
    kSolver = 3,
    kTraining = 4,
    kInfeasible = 5,
    kCompare = 6,
};

/// Runs one command line (args[0] is the program name) and returns its exit code.
int run(const std::vector<std::string>& args);

}  // namespace xfmr::cli
