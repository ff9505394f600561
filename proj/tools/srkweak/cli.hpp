#pragma once

#include <ostream>

namespace srkw::cli {

enum ExitCode { ok = 0, violations = 1, usage = 2, failure = 3 };

/// Parses argv and runs one subcommand.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace srkw::cli
