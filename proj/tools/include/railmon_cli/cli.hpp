#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace railmon::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

/// Runs one invocation. `args` excludes the program name. Usage errors write
/// only to `err` and return kExitUsage.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace railmon::cli
