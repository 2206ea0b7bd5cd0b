#pragma once

#include <iosfwd>

namespace rmp::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kValidation = 2;   // scenario or argument fails validation
inline constexpr int kSolver = 3;       // solver, regression or numeric failure
inline constexpr int kNotCertified = 4; // optimize ended without a certified residual
inline constexpr int kUsage = 64;       // unknown subcommand or flag
inline constexpr int kIo = 74;          // report could not be written

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rmp::cli
