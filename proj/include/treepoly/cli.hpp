#pragma once

#include <iosfwd>
#include <optional>
#include <string_view>

#include "treepoly/config.hpp"

namespace treepoly::cli {

inline constexpr std::string_view kVersion = "0.1.0";

/// Exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,         // unknown command or bad flags
  kConfigError = 2,   // invalid config, law spec or grid
  kBudget = 3,        // work budget exceeded
  kVerifyFailed = 4,  // verify found a mismatch
  kDomainError = 5,   // quantity undefined for the input (e.g. weak disorder)
};

/// Executes `config.command`, writing artifacts into config.output_dir.
/// Messages go to `out`, errors to `err`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

struct ParsedArgs {
  RunConfig config;
  std::optional<int> exit_code;  // set when the process should stop here
};

/// Flags, then TREEPOLY_THREADS, then the --config file, then defaults.
ParsedArgs parse_args(int argc, char** argv);

/// Full front-end: flags, config file and TREEPOLY_THREADS.
int main(int argc, char** argv);

}  // namespace treepoly::cli
