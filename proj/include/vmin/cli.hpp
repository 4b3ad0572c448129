#pragma once

#include <string>
#include <vector>

namespace vmin {

/// Entry point shared by the vmin binary and the test suites.
/// Exit codes: 0 success, 2 input/config error, 3 numerical divergence,
/// 4 transfer incompatibility.
int run_cli(const std::vector<std::string>& args);

}  // namespace vmin
