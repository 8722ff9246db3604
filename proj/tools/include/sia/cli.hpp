#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sia::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSolverFailure = 1;
inline constexpr int kExitConfigError = 2;

/// Entry point of the siaob tool. args excludes the program name.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sia::cli
