#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sllab::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes: 0 success with all built-in checks passing, 1 check failure,
/// 2 usage, configuration or module error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace sllab::cli
