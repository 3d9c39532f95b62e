#pragma once

#include <ostream>

namespace duelay {

/// Entry point of the `duelay` tool. Exit codes: 0 success, 1 usage or
/// configuration error, 2 runtime error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace duelay
