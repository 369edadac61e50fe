#pragma once

#include <iosfwd>

namespace selfnorm::cli {

/// Runs the command line tool with explicit streams. Exit codes: 0 on
/// success, 1 for usage or validation errors, 2 for numerical failures.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace selfnorm::cli
