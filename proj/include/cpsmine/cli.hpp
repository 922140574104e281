#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cpsmine::cli {

enum ExitCode : int { Ok = 0, Usage = 1, ConfigFailure = 2, InputFailure = 3, StageFailure = 4 };

/// Entry point behind the `cpsmine` binary; `args` excludes the program name.
/// Results go to `out`, diagnostics (one JSON object per failure) to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cpsmine::cli
