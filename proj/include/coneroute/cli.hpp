#pragma once

#include <string>
#include <vector>

namespace coneroute {

// Front end behind the `coneroute` binary. Subcommands: resolve, simulate,
// capacity, verify, sweep. Returns the process exit code: 0 success,
// 1 verification failure, 2 usage or config error.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

}  // namespace coneroute
