#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qsparse {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// Entry point of the `qsparse` command line tool. `args` excludes the
/// program name. Reads data from `in` when no input file is given.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace qsparse
