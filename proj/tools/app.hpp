#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ufrkit::cli {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs the tool on `args` (args[0] is the program name). Progress goes to `out`;
/// failures are written to `err` as one JSON object {"error": {"kind", "message"}}.
/// UFRKIT_SEED, when set, overrides both --seed and any config file value.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ufrkit::cli
