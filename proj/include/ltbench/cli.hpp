#pragma once

#include <iosfwd>

namespace lt {

/// Command-line entry point. Returns 0 on success, 1 on usage errors and 2 on
/// data errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lt
