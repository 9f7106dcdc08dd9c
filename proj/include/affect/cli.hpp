#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace affect::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kUnexpected = 1, kConfigError = 2, kDataError = 3, kNumericError = 4 };

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace affect::cli
