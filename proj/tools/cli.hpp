#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace has::cli {

inline constexpr const char* kToolVersion = "1.0.0";

/// Runs one invocation. `args` excludes the program name. Returns 0 on
/// success, 1 for invalid arguments, 2 for I/O or format errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace has::cli
