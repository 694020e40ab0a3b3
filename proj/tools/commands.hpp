#pragma once
// Entry point of the `lstat` command line, callable from tests.
#include <iosfwd>
#include <string>
#include <vector>

namespace ltest::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInternal = 3;

/// Runs the CLI on `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ltest::cli
