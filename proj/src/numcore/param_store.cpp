#include "hoidist/numcore/param_store.hpp"

#include <algorithm>

namespace numcore {

Tensor ParamStore::create(const std::string& name, Tensor init) {
    if (entries_.count(name))
        throw hoidist::ContractViolation("duplicate parameter name: " + name);
    init.raw()->requires_grad = true;
    entries_.emplace(name, init);
    return init;
}

Tensor ParamStore::create(const std::string& name, Tensor init, std::vector<uint8_t> learnable_mask) {
    if (static_cast<int64_t>(learnable_mask.size()) != init.numel())
        throw hoidist::ContractViolation("mask size mismatch for parameter " + name);
    Tensor t = create(name, std::move(init));
    masks_.emplace(name, std::move(learnable_mask));
    return t;
}

Tensor ParamStore::get(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end())
        throw hoidist::ContractViolation("unknown parameter: " + name);
    return it->second;
}

const std::vector<uint8_t>& ParamStore::mask(const std::string& name) const {
    auto it = masks_.find(name);
    return it == masks_.end() ? empty_mask_ : it->second;
}

void ParamStore::zero_grad() {
    for (auto& [name, t] : entries_) {
        t.raw()->grad.assign(t.raw()->value.size(), 0.0);
    }
}

std::map<std::string, Tensor> ParamStore::gradient_map() const {
    std::map<std::string, Tensor> out;
    for (const auto& [name, t] : entries_)
        out.emplace(name, grad_of(t));
    return out;
}

int64_t ParamStore::param_count(const std::string& prefix) const {
    int64_t n = 0;
    for (const auto& [name, t] : entries_) {
        if (name.compare(0, prefix.size(), prefix) != 0)
            continue;
        const auto& m = mask(name);
        if (m.empty()) {
            n += t.numel();
        } else {
            n += std::count(m.begin(), m.end(), uint8_t{1});
        }
    }
    return n;
}

}  // namespace numcore
