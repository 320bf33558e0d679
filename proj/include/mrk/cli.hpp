#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mrk::cli {

/// Entry point of the `mrk` tool. `args` excludes the program name.
/// Returns the process exit code; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mrk::cli
