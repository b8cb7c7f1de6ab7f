#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace aidetect::cli {

/// Runs one `aidetect` invocation. `args` excludes the program name.
/// Returns the process exit code: 0 success, 1 I/O failure, 2 invalid input.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aidetect::cli
