#pragma once

#include <ostream>

namespace tnperm {

/// Exit codes: 0 success, 1 runtime failure or failed assumption check,
/// 2 usage or input error, 3 undecidable recovery.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tnperm
