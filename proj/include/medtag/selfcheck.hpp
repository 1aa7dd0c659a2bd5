#pragma once

#include <string>
#include <vector>

namespace medtag {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double limit = 0.0;
};

/// Quick closed-form checks of the signal chain, run by `medtag check`.
std::vector<CheckResult> run_self_checks();

}  // namespace medtag
