#ifndef WTCONV_CHECKS_HPP
#define WTCONV_CHECKS_HPP

// Self-test suites behind `wtconv check`.

#include <string>
#include <vector>

namespace wtconv {

struct CheckResult {
  std::string suite;  // "<group>.<name>"
  bool passed = false;
  std::string detail;
};

struct CheckOptions {
  std::string group;          // run only suites whose group matches; empty = all
  bool inject_fault = false;  // flip one sign of the HH kernel in the wavelet suites
};

std::vector<std::string> check_suite_names();

std::vector<CheckResult> run_checks(const CheckOptions& opts);

}  // namespace wtconv

#endif  // WTCONV_CHECKS_HPP
