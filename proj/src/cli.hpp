#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lpvstab::cli {

enum ExitCode : int { kFeasible = 0, kInfeasible = 1, kInconclusive = 2, kUsage = 3 };

/// Environment variable naming a JSON file with default solver options.
inline constexpr const char* kOptionsEnv = "LPVSTAB_SOLVER_OPTIONS";

/// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lpvstab::cli
