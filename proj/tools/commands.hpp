#ifndef HEATDUAL_TOOLS_COMMANDS_HPP
#define HEATDUAL_TOOLS_COMMANDS_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace heatdual::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode { kOk = 0, kUsage = 1, kVerificationFailed = 2 };

/// Runs the tool on `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace heatdual::cli

#endif  // HEATDUAL_TOOLS_COMMANDS_HPP
