#pragma once

#include <iosfwd>

namespace treecycles {

/// Entry point of the `treecycles` command. Exit codes: 0 success, 1 failed
/// verification, 2 invalid flags or empty grid, 3 capacity error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace treecycles
