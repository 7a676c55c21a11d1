#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace cbpsk::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailed = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kToolVersion = "0.1.0";

/// Runs the command line with `args` (args[0] is the program name). Results go to
/// `out` unless --out names a file; diagnostics go to `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

/// Fixed 17-significant-digit rendering used in every CSV/JSON field.
std::string format_double(double value);

}  // namespace cbpsk::cli
