#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace scaf::cli {

enum ExitCode {
  kOk = 0,
  kFailure = 1,
  /// Unreadable, unparsable or invalid input, or bad flags.
  kInputError = 2,
  /// The remote oracle could not be reached.
  kOracleError = 3,
};

/// Runs one subcommand. `args` excludes the program name. Reports go to
/// `out` (or --out); failures print {"error": {"kind", "message"}} to `out`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace scaf::cli
