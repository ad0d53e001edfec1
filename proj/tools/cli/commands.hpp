#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace scrbm::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitBadFlags = 2;
inline constexpr int kExitDataError = 3;
inline constexpr int kExitNumericFault = 4;

/// Entry point shared by main() and the tests. `args` excludes the program
/// name. Normal output goes to `out`, diagnostics to `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace scrbm::cli
