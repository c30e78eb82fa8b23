#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace untrue {

/// Exit codes: 0 success, 1 usage error, 2 operational failure.
/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace untrue
