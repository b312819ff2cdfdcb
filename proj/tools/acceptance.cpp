#include <iostream>

#include "layercon/acceptance.hpp"

int main() {
  bool ok = true;
  layercon::run_acceptance([&](const layercon::CriterionResult& r) {
    ok = ok && r.passed;
    std::cout << layercon::format_result(r) << std::endl;
  });
  return ok ? 0 : 1;
}
