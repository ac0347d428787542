#pragma once

#include <iosfwd>

namespace khan {

/// Entry point for the `khan` tool. Returns the process exit code:
/// 0 success, 2 configuration error, 3 data error, 4 numerical degeneracy.
int run_cli(int argc, const char* const* argv);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace khan
