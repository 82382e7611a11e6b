#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hoidist/numcore/tensor.hpp"

namespace numcore {

// Named parameter registry. Iteration is sorted by name, so every walk over
// the store (optimizer, checkpoint, gradient map) is deterministic.
class ParamStore {
  public:
    explicit ParamStore(uint64_t rng_seed = 0) : rng_seed_(rng_seed) {}

    Tensor create(const std::string& name, Tensor init);
    Tensor create(const std::string& name, Tensor init, std::vector<uint8_t> learnable_mask);

    bool contains(const std::string& name) const { return entries_.count(name) > 0; }
    Tensor get(const std::string& name) const;

    // Per-element learnability; empty vector means fully learnable.
    const std::vector<uint8_t>& mask(const std::string& name) const;

    const std::map<std::string, Tensor>& entries() const { return entries_; }

    void zero_grad();

    // Copies of accumulated gradients, keyed by name.
    std::map<std::string, Tensor> gradient_map() const;

    // Learnable element count, optionally restricted to a name prefix.
    int64_t param_count(const std::string& prefix = "") const;

    uint64_t rng_seed() const { return rng_seed_; }
    void set_rng_seed(uint64_t s) { rng_seed_ = s; }

  private:
    std::map<std::string, Tensor> entries_;
    std::map<std::string, std::vector<uint8_t>> masks_;
    std::vector<uint8_t> empty_mask_;
    uint64_t rng_seed_;
};

}  // namespace numcore
