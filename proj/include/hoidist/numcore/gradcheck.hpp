#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hoidist/numcore/tensor.hpp"

namespace numcore {

struct GradCheckEntry {
    std::string name;
    double max_rel_err = 0.0;
    int64_t probed = 0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double max_rel_err = 0.0;
    bool pass = false;
};

struct GradCheckInput {
    std::string name;
    Tensor tensor;
    // Elements with mask 0 are never probed (frozen slots whose gradient is
    // zeroed on purpose). Empty means every element is fair game.
    std::vector<uint8_t> probe_mask{};
};

// Compares analytic gradients of `f` against central finite differences.
//
// `f` must rebuild its graph on every call, reading the current values of
// the listed input tensors, and be deterministic. `probes_per_tensor` < 0
// probes every element; otherwise a seeded random subset. Relative error is
// |a - n| / max(1, |a|, |n|). Throws NumericalError if `f` goes non-finite
// at a probe point.
GradCheckReport gradcheck(const std::function<Tensor()>& f,
                          const std::vector<GradCheckInput>& inputs, double tol,
                          int probes_per_tensor = -1, uint64_t probe_seed = 0,
                          double step = 1e-6);

}  // namespace numcore
