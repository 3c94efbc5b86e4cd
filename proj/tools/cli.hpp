#pragma once

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

namespace svbm::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kOutputFailure = 1,
    kUsageError = 2,
    kDataError = 3,
    kTrainingError = 4,
};

/// Prints a message for a failed command and returns its exit code.
int report_error(std::exception_ptr error, std::ostream& err);

/// Runs one command line. `args` excludes the program name, e.g.
/// {"train", "--data", "blobs.csv"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace svbm::cli
