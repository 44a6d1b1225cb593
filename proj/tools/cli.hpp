#pragma once

#include <string>
#include <vector>

namespace pol::cli {

enum ExitCode : int { ok = 0, usage = 1, data_error = 2, numeric_error = 3 };

// Runs one `pol` invocation; args excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace pol::cli
