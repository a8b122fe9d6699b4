#pragma once

#include <iosfwd>
#include <string>

namespace chainres::cli {

inline constexpr const char* version = "0.1.0";

// Entry point behind the chainres executable. Returns the process exit code:
// 0 success, 2 bad input or config, 3 numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// 17 significant digits, scientific, fixed width for a given sign/exponent.
std::string format_number(double x);

} // namespace chainres::cli
