#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "stiction/error.hpp"

namespace stiction::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

int exit_code(ErrorKind kind);

// Parses and runs one subcommand. Failures are reported on `err` as a
// single `error: <Kind>: <message>` line; the return value is the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stiction::cli
