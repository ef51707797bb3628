#pragma once

#include <string>
#include <vector>

namespace tgpr::cli {

/// Entry point shared by the binary and the tests. Returns the process exit
/// code: 0 success, 2 configuration or usage error, 3 numerical failure.
int run(const std::vector<std::string>& argv);

}  // namespace tgpr::cli
