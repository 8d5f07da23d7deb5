#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lucbat::cli {

enum ExitStatus { kOk = 0, kInputError = 1, kInternalError = 2 };

/// Runs one lucbat command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lucbat::cli
