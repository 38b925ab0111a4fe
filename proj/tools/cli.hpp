#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qlat {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDiagnostics = 1;
inline constexpr int kExitIo = 2;

/// Runs the `qlat` command line. `args` excludes the program name.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qlat
