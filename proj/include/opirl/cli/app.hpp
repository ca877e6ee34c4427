#pragma once

namespace opirl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `opirl` command-line tool. Returns 0 on success, 1 on a
/// runtime or verification failure and 2 on a usage error.
int run_cli(int argc, const char* const* argv);

}  // namespace opirl
