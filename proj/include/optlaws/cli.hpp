#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace optlaws::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;

/// Entry point of the `optlaws` tool. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace optlaws::cli
