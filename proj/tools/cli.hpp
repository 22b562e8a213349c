#pragma once

// Command-line front end: simulate | certify | solve | brute-force | validate.
// Every subcommand writes CSV files into --out; see README for the formats.

#include <ostream>

namespace vsl::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kInfeasible = 3,
  kNumericalFailure = 4,
};

// Parses argv and runs one subcommand. Progress goes to `out`, diagnostics to
// `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vsl::cli
