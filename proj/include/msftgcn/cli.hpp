#pragma once

#include <ostream>

namespace msftgcn {

// Exit codes: 0 success, 1 runtime or check failure, 2 usage error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace msftgcn
