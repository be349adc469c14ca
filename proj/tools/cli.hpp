#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tvbg::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kBadArguments = 2,
  kDataError = 3,
  kFitFailure = 4,
};

/// Runs one `tvbg-seir` invocation. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tvbg::cli
