#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace a2grad {

struct SelftestResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Small-size versions of the library's invariant checks (a few seconds in
/// total). Never throws; an exception inside a check counts as a failure.
std::vector<SelftestResult> run_selftest();

/// Prints one PASS/FAIL line per check; returns true if all passed.
bool report_selftest(const std::vector<SelftestResult>& results, std::ostream& out);

}  // namespace a2grad
