#pragma once

// Subcommands: eval, synthesize, sweep, verify.
//
// Exit codes: 0 success, 1 verification failures, 2 usage or configuration
// error, 3 infeasible problem, 4 convergence failure.

#include <iosfwd>
#include <string>
#include <vector>

namespace modpot {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailures = 1,
  kExitUsage = 2,
  kExitInfeasible = 3,
  kExitConvergence = 4,
};

// `a:b:step` (inclusive, step > 0) or a comma-separated list. Throws
// ConfigError on malformed or empty input.
std::vector<double> parse_values(const std::string& spec);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace modpot
