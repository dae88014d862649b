#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace driftcomp::cli {

inline constexpr const char* kToolVersion = "1.0.0";

/// Runs one command line (program name excluded) and returns the process exit
/// status: 0 success, 2 usage, 3 data or validation, 4 numerical divergence.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace driftcomp::cli
