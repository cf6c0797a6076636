#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rrhmm::cli {

inline constexpr const char* kVersion = "0.1.0";

//! Runs one command line (args excludes the program name). Returns the process
//! exit code: 0 success, 1 runtime/data error, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rrhmm::cli
