#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dosskit {

inline constexpr const char* kToolName = "dosskit";
extern const char* const kToolVersion;

/// Runs the command-line tool in-process. `args[0]` is the program name.
/// Returns the process exit status: 0 success, 1 I/O failure, 2 usage or
/// validation failure, 3 computation failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dosskit
