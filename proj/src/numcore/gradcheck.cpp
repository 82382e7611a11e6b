#include "hoidist/numcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace numcore {

GradCheckReport gradcheck(const std::function<Tensor()>& f,
                          const std::vector<GradCheckInput>& inputs, double tol,
                          int probes_per_tensor, uint64_t probe_seed, double step) {
    GradCheckReport report;

    Tensor loss = f();
    if (!std::isfinite(loss.item()))
        throw hoidist::NumericalError("gradcheck: loss is non-finite at the base point");
    for (const auto& in : inputs)
        in.tensor.raw()->grad.assign(in.tensor.raw()->value.size(), 0.0);
    backward(loss);

    std::vector<std::vector<double>> analytic;
    analytic.reserve(inputs.size());
    for (const auto& in : inputs) {
        in.tensor.raw()->ensure_grad();
        analytic.push_back(in.tensor.raw()->grad);
    }

    Rng rng(probe_seed ^ 0x67adc0ffeeull);
    for (size_t k = 0; k < inputs.size(); ++k) {
        const auto& in = inputs[k];
        GradCheckEntry entry;
        entry.name = in.name;
        const int64_t n = in.tensor.numel();

        std::vector<int64_t> allowed;
        allowed.reserve(static_cast<size_t>(n));
        for (int64_t i = 0; i < n; ++i)
            if (in.probe_mask.empty() || in.probe_mask[static_cast<size_t>(i)])
                allowed.push_back(i);

        std::vector<int64_t> probe_idx;
        if (probes_per_tensor < 0 || probes_per_tensor >= static_cast<int>(allowed.size())) {
            probe_idx = allowed;
        } else {
            for (int i = 0; i < probes_per_tensor; ++i)
                probe_idx.push_back(allowed[rng.next_u64() % allowed.size()]);
            std::sort(probe_idx.begin(), probe_idx.end());
            probe_idx.erase(std::unique(probe_idx.begin(), probe_idx.end()), probe_idx.end());
        }

        auto& values = in.tensor.raw()->value;
        for (int64_t i : probe_idx) {
            const double saved = values[i];
            values[i] = saved + step;
            const double fp = f().item();
            values[i] = saved - step;
            const double fm = f().item();
            values[i] = saved;
            if (!std::isfinite(fp) || !std::isfinite(fm))
                throw hoidist::NumericalError("gradcheck: f non-finite near " + in.name + "[" +
                                              std::to_string(i) + "]");
            const double numeric = (fp - fm) / (2.0 * step);
            const double a = analytic[k][static_cast<size_t>(i)];
            const double err = std::fabs(a - numeric) /
                               std::max({1.0, std::fabs(a), std::fabs(numeric)});
            entry.max_rel_err = std::max(entry.max_rel_err, err);
            ++entry.probed;
        }
        report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
        report.entries.push_back(std::move(entry));
    }
    report.pass = report.max_rel_err < tol;
    return report;
}

}  // namespace numcore
