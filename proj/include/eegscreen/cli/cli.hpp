#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eegscreen::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kValidationError = 2;

// Environment variable naming the directory that relative paths resolve
// against.
inline constexpr const char* kDataDirEnv = "EEGSCREEN_DATA_DIR";

// Runs one subcommand. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace eegscreen::cli
