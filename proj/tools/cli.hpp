#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace critmatrix::cli {

enum ExitCode : int {
  kOk = 0,
  kError = 1,
  kUsage = 2,
  kUnresolved = 3,
  kCollision = 4,
};

/// Runs one command line; args[0] is the program name.
int Dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace critmatrix::cli
