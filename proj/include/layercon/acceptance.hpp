#pragma once

#include <functional>
#include <string>
#include <vector>

namespace layercon {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string measured;   // what was observed, against which tolerance
  double seconds = 0.0;
  double budget = 0.0;    // runtime limit in seconds; 0 means none
};

/// The ten acceptance criteria, in order. Each criterion catches its own
/// exceptions and reports them as a failure.
std::vector<CriterionResult> run_acceptance(const std::function<void(const CriterionResult&)>& on_result = {});

/// "PASS  3 orthonormality and transmission: ... [0.12 s]"
std::string format_result(const CriterionResult& r);

}  // namespace layercon
