#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace trsp {

/// Runs one command line (without the program name). Returns 0 on success,
/// 1 on usage or input errors and 2 on internal errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace trsp
