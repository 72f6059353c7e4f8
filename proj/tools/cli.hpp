#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scnn::cli {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kConfigError = 2,
  kCorruptData = 3,
};

/// Runs `scnn <subcommand> ...`; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace scnn::cli
