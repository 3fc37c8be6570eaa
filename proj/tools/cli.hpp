#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace trick::cli {

enum ExitCode : int { kSuccess = 0, kConfigError = 1, kExperimentFailure = 2 };

/// Entry point shared by the executable and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct CheckLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Invariants over synthetic geometry: delay algebra, sum monotonicity,
/// backward-delay cancellation, solver round trip and Jacobian agreement.
std::vector<CheckLine> selfcheck(unsigned long long seed);

}  // namespace trick::cli
