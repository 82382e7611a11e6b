#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hoidist/numcore/tensor.hpp"

// Frozen, deterministic stand-in for a pre-trained text encoder. Words are
// hashed to a fixed table; embeddings come from a seeded stream, so the same
// word maps to the same vector in every run.
namespace textenc {

inline constexpr int kStart = 0;
inline constexpr int kEnd = 1;
inline constexpr int kPad = 2;
inline constexpr int kPlaceholder = 3;
inline constexpr int kNumSpecials = 4;
inline constexpr int kTableSize = 4096;
inline constexpr uint64_t kDefaultVocabSeed = 7;

class Vocab {
  public:
    explicit Vocab(int embed_dim, uint64_t seed = kDefaultVocabSeed);

    int embed_dim() const { return embed_dim_; }
    uint64_t seed() const { return seed_; }

    // Lowercase whitespace split, FNV-1a hash into [kNumSpecials, kTableSize).
    std::vector<int> tokenize(const std::string& text) const;

    // Deterministic embedding of one token id.
    std::vector<double> embedding(int token_id) const;

  private:
    int embed_dim_;
    uint64_t seed_;
};

// One prompt layout: [START][category tokens][V: M learnable][END].
// Learnable slots carry the PAD id; frozen slots never receive gradient.
struct TokenizedPrompt {
    std::vector<int> token_ids;        // length L
    numcore::Tensor embeddings;        // L x e; frozen content + learnable init
    std::vector<uint8_t> frozen_mask;  // length L, 1 = frozen
    int learnable_count = 0;           // M

    std::vector<uint8_t> learnable_elements(int embed_dim) const;
};

// Category prior prompt. Learnable slots are initialised from N(0, 0.02^2)
// using `init_rng`; everything frozen is a pure function of (description, L,
// e, vocab seed). Throws ConfigError when the description does not leave
// room for at least one learnable token.
TokenizedPrompt encode_category(const Vocab& vocab, const std::string& description, int L,
                                numcore::Rng& init_rng);

// Zero-shot prompt: the category prior is masked by n frozen PLACEHOLDER
// tokens; the rest of the interior stays learnable.
TokenizedPrompt placeholder_prompt(const Vocab& vocab, int L, int n_placeholders,
                                   numcore::Rng& init_rng);

}  // namespace textenc
