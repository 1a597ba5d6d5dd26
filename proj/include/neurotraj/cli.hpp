#pragma once

#include <ostream>

namespace neurotraj {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitEngine = 4;
inline constexpr int kExitMalformed = 5;

/// Entry point shared by the executable and the tests. argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace neurotraj
