#pragma once

#include <string>
#include <vector>

namespace meshpde::cli {

/// Entry point behind the meshpde binary. Returns the process exit code;
/// failures print a single "error: ..." line on stderr.
int run(const std::vector<std::string>& args);

}  // namespace meshpde::cli
