#pragma once

#include <ostream>

namespace evsem {

// Exit codes: 0 pass, 1 semantic check failed, 2 usage or input error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace evsem
