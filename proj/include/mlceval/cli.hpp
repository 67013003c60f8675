#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace mlceval::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 64;       // bad command line
inline constexpr int kExitValidation = 65;  // bad data or configuration
inline constexpr int kExitBackend = 69;     // endpoint unavailable
inline constexpr int kExitInternal = 70;    // unexpected failure

// Runs one subcommand; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
        std::ostream& err = std::cerr);

}  // namespace mlceval::cli
