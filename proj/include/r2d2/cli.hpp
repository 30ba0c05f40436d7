#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace r2d2 {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `r2d2` command line; `args` excludes the program name.
///
/// Subcommands: estimate-noise, denoise, denoise-sr, sweep-alpha, uncertainty, generate,
/// metrics, tweedie. Errors go to `err` as one line of JSON.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace r2d2
