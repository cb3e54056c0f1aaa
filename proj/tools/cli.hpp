#pragma once

#include <string>
#include <vector>

namespace kpo::cli {

/// Runs the command line (args excludes the program name). Returns the exit
/// code: 0 success, 1 computation error, 2 usage or configuration error.
int run(const std::vector<std::string>& args);

}  // namespace kpo::cli
