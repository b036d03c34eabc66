#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace projgeo {

struct CriterionResult {
    int index = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0;
};

// Runs the full acceptance suite. When `progress` is given, one
// "criterion N PASS|FAIL - name: detail" line is printed per criterion as
// it completes.
std::vector<CriterionResult> run_acceptance_suite(std::ostream* progress = nullptr,
                                                  unsigned seed = 20250808);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace projgeo
