#pragma once

#include <iosfwd>

namespace exlevy::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kData = 3,
  kNumerical = 4,
};

/// Entry point of the levy_exchange tool: subcommands price, calibrate, simulate, compare.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace exlevy::cli
