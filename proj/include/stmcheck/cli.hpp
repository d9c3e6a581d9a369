#ifndef STMCHECK_CLI_HPP
#define STMCHECK_CLI_HPP

#include <ostream>

namespace stmcheck {

/// Exit codes of the command-line driver.
enum ExitCode : int {
  kExitOk = 0,
  kExitViolation = 1,
  kExitInputError = 2,
  kExitBudget = 3,
};

/// Runs the `stmcheck` command line. argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stmcheck

#endif  // STMCHECK_CLI_HPP
