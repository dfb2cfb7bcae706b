#pragma once
// The four experiment commands behind the CLI.  Each validates its inputs,
// computes, writes artifacts into the configured directory, and prints a
// one-line summary per experiment cell.

#include "runner/options.hpp"

namespace fraclap::runner {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 2;
inline constexpr int exit_numerical_failure = 3;

/// Dispatches on config.command.  Returns a process exit code: 0 on
/// success, 2 for configuration problems (nothing computed), 3 when a
/// solver fails (partial artifacts may exist).
int run(const RunConfig& config);

}  // namespace fraclap::runner
