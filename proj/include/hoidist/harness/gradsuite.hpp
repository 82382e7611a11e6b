#pragma once

#include <string>
#include <vector>

namespace harness {

struct GradSuiteCheck {
    std::string name;
    double max_rel_err = 0.0;
    bool pass = false;
};

struct GradSuiteResult {
    std::vector<GradSuiteCheck> checks;
    bool pass = false;
    double tolerance = 1e-5;
};

// The full gradient battery: orthogonal loss (all three variants), the
// frozen-noise sampling path, aggregation, query composition, and the
// complete objective on a 2-scene batch with probing across every parameter
// group.
GradSuiteResult run_grad_suite(uint64_t seed = 42);

}  // namespace harness
