// Acceptance gate: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Exits nonzero when any criterion fails.
#include <cstdio>
#include <iostream>

#include "projgeo/verify.hpp"

int main() {
    auto results = projgeo::run_acceptance_suite(&std::cout);
    int failed = 0;
    for (const auto& r : results)
        if (!r.passed) ++failed;
    std::printf("acceptance: %zu criteria, %d failed\n", results.size(), failed);
    return failed == 0 ? 0 : 1;
}
