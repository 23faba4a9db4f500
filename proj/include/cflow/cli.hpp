#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cflow/error.hpp"

namespace cflow {

/// Process exit statuses. Verification failure is kept apart from the
/// operational failures so a script can tell "wrong answer" from "no answer".
enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitParse = 2,
  kExitSingular = 3,        // singular matrix or zero eigenvalue
  kExitNonConvergence = 4,  // root finder, ambiguous rank, non-finite values
  kExitRelationInvalid = 5,
};

int exit_code_for(ErrorKind kind);

/// Runs one `cflow` invocation. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cflow
