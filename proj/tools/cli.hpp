#pragma once

#include <ostream>
#include <span>
#include <string>

namespace mbio::cli {

/// Exit codes. verify/identify use kReject for a negative decision; every
/// other failure (bad flags, unreadable files, unknown subjects) is kError.
inline constexpr int kOk = 0;
inline constexpr int kReject = 1;
inline constexpr int kError = 2;

/// Runs one `mbio` invocation. `args` excludes the program name.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace mbio::cli
