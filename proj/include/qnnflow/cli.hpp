#pragma once

#include <ostream>

namespace qnnflow {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 1,
  kExitInfeasible = 2,  // over a resource cap, or over the validation tolerance
};

/// Runs one subcommand. Reports go to `out` (or the --out file), diagnostics
/// to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qnnflow
