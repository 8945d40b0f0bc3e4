#pragma once

// Command-line front end. Exit codes: 0 success, 1 input error,
// 2 LBP non-convergence, 3 identity-check failure.

#include <ostream>
#include <string>
#include <vector>

namespace loopseries {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitIdentity = 3;

/// args excludes the program name. Reports go to out, one-line JSON errors to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace loopseries
