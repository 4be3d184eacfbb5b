// Acceptance binary: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <cstdlib>
#include <iostream>

#include "dslab/acceptance.hpp"

int main(int argc, char** argv) {
    const int only = argc > 1 ? std::atoi(argv[1]) : 0;
    int failed = 0;
    dslab::run_acceptance(only, 1, [&](const dslab::CriterionResult& r) {
        std::cout << dslab::format_result(r) << std::endl;
        failed += !r.pass;
    });
    return failed == 0 ? 0 : 1;
}
