#pragma once

#include <cstdint>

namespace numcore {

// Counter-based generator: output i is a pure function of (key, i), so the
// stream is reproducible across runs and can be split into independent
// substreams without sharing state.
class Rng {
  public:
    explicit Rng(uint64_t seed) : key_(mix(seed ^ 0x7f4a7c15u)), counter_(0) {}

    // Independent stream derived from this one's key and a tag.
    Rng substream(uint64_t tag) const {
        Rng r(0);
        r.key_ = mix(key_ ^ mix(tag + 0x9e3779b97f4a7c15ull));
        r.counter_ = 0;
        return r;
    }

    uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ull * ++counter_); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; always consumes exactly two draws.
    double gaussian();

    uint64_t key() const { return key_; }
    uint64_t counter() const { return counter_; }

  private:
    static uint64_t mix(uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }

    uint64_t key_;
    uint64_t counter_;
};

}  // namespace numcore
