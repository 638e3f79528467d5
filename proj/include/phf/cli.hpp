#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace phf::cli {

/// Stable process exit codes.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kArgumentError = 2,
  kConvergence = 3,
  kResources = 4,
  kMismatch = 5,
  kInapplicable = 6,
};

/// Parses a byte count with an optional K/M/G/T suffix (powers of 1024).
std::size_t parse_bytes(const std::string& text);

/// Memory budget from PHF_MEMORY_BUDGET, if set.
std::optional<std::size_t> env_memory_budget();

/// Runs the command line `args` (without the program name). Everything the
/// tool prints goes to `out` / `err`; returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace phf::cli
