#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nosig::cli {

enum ExitCode : int {
  kOk = 0,
  kCertificateFailure = 1,
  kValidationError = 2,
  kIoError = 3,
};

/// Runs the command line `args` (without the program name). Results go to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nosig::cli
