#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace guiagent::cli {

enum ExitCode { kOk = 0, kTaskFailure = 1, kConfigError = 2 };

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace guiagent::cli
