// Acceptance suite: runs every verification criterion and prints one
// pass/fail line per criterion. Exit code is the number of failures.

#include <cstdio>

#include "phiregret/selfcheck.hpp"

int main() {
  const auto results = phiregret::selfcheck::run_all();
  int failures = 0;
  int index = 0;
  for (const auto& r : results) {
    ++index;
    std::printf("criterion %2d [%s] %s: %s\n", index,
                r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    std::fflush(stdout);
    if (!r.passed) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failures,
              results.size());
  return failures;
}
