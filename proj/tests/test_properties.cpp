#include <chrono>

#include "doctest.h"
#include "invariants.hpp"

TEST_CASE("randomised invariants hold") {
  const auto start = std::chrono::steady_clock::now();
  for (const auto& outcome : invariants::run_all(1000, 0xC0FFEE)) {
    INFO(outcome.name << ": " << outcome.first_failure);
    CHECK(outcome.cases >= 1000);
    CHECK(outcome.failures == 0);
  }
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(30));
}
