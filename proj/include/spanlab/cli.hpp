#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spanlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `spanlab` subcommand. `args` includes the program name.
/// Returns 0 on success, 1 on validation or runtime failure and 2 on a
/// usage error (message and usage text go to `err`).
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spanlab
