#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace qtrabi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line (arguments after the program name) in-process.
int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace qtrabi::cli
