#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lvgg::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kNumericalFailure = 1;
inline constexpr int kUsageError = 2;

// Runs one command line (without the program name). Output that would go to
// stdout / stderr is written to `out` / `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lvgg::cli
