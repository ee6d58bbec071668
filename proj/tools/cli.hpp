#pragma once

#include <ostream>

namespace linevox {

/// Entry point of the `linevox` command. Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace linevox
