#pragma once

// Command-line front end. Subcommands: gen, solve, simulate, compare, fit,
// run. Exit codes: 0 ok, 2 bad input or config, 3 numerical failure.

#include <iosfwd>

namespace dbbid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dbbid::cli
