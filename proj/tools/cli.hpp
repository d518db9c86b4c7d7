#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ldrr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

// args[0] is the program name. Results go to `out` unless --out is given;
// the resolved configuration and all diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ldrr::cli
