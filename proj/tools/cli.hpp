#pragma once

#include <ostream>

namespace sttopo::cli {

// Exit codes: 0 success, 1 check failed, 2 config, 3 dimension, 4 hierarchy,
// 5 solver, 6 io, 70 anything else. Errors go to `err` as one JSON object.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sttopo::cli
