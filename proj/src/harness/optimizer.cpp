#include "hoidist/harness/optimizer.hpp"

#include <cmath>

namespace harness {

AdamW::AdamW(numcore::ParamStore& store, double lr, double beta1, double beta2, double eps,
             double weight_decay)
    : store_(store), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
      weight_decay_(weight_decay) {
    for (const auto& [name, t] : store_.entries()) {
        m_[name].assign(static_cast<size_t>(t.numel()), 0.0);
        v_[name].assign(static_cast<size_t>(t.numel()), 0.0);
    }
}

void AdamW::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (const auto& [name, t] : store_.entries()) {
        auto* node = t.raw();
        node->ensure_grad();
        const auto& mask = store_.mask(name);
        auto& m = m_[name];
        auto& v = v_[name];
        for (size_t i = 0; i < node->value.size(); ++i) {
            if (!mask.empty() && !mask[i])
                continue;  // frozen: bit-identical to init forever
            const double g = node->grad[i];
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            node->value[i] -= lr_ * (mhat / (std::sqrt(vhat) + eps_) +
                                     weight_decay_ * node->value[i]);
        }
    }
}

}  // namespace harness
