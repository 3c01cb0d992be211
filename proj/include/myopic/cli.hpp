#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace myopic::cli {

// Exit statuses shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,           // bad config, I/O, usage
  kNotIdentifiable = 2,   // global identifiability fails
  kInsufficientData = 3,  // a rejection rate could not be fitted
  kBoundViolated = 4,     // fewer than 95% of rate checks pass
};

inline constexpr double kRequiredPassFraction = 0.95;

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace myopic::cli
