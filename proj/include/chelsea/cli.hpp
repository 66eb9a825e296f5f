#pragma once

namespace chelsea {

// Exit codes, one per error class so scripts can branch on failures.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;      // subcommand ran and reported failure
inline constexpr int kExitUsage = 2;        // unknown flags / missing arguments
inline constexpr int kExitConfig = 3;       // invalid tunables
inline constexpr int kExitTensorIo = 4;     // missing or malformed tensor files
inline constexpr int kExitContract = 5;     // inconsistent inputs
inline constexpr int kExitConvergence = 6;  // compression cannot reach budget

/// Entry point behind the `chelsea` binary; also callable from tests.
int run_cli(int argc, const char* const* argv);

}  // namespace chelsea
