#pragma once

#include <set>
#include <string>
#include <vector>

#include "hoidist/categories.hpp"
#include "hoidist/numcore/ops.hpp"
#include "hoidist/numcore/param_store.hpp"
#include "hoidist/textenc.hpp"

// Owns the learnable prompt collections of the subject / object /
// interaction groups. Each collection is one named K x L x e parameter with
// a frozen mask over (K, L); frozen positions never move after init.
namespace promptspace {

enum class GroupKind { subject, object, interaction };

const char* group_name(GroupKind g);

struct PromptCollection {
    GroupKind group;
    int category_id = 0;
    std::string label;       // category text; subjects are anonymous
    std::string param_name;  // name in the ParamStore
    numcore::Tensor block;   // K x L x e parameter leaf
    std::vector<uint8_t> frozen_kl;  // K*L, 1 = frozen (broadcast over e)
    int K = 0, L = 0, e = 0;
    int placeholder_count = 0;  // frozen PLACEHOLDER tokens per prompt (zero-shot)

    // Block routed through the freeze mask; frozen slots get zero gradient.
    numcore::Tensor masked_block() const;

    // Elementwise mean over the K axis of the masked block (L x e).
    numcore::Tensor pooled_mean() const;

    // Per-element learnability mask of length K*L*e (1 = learnable).
    std::vector<uint8_t> element_mask() const;
};

struct PromptGroup {
    GroupKind kind = GroupKind::subject;
    std::vector<PromptCollection> collections;
    int N() const { return static_cast<int>(collections.size()); }
};

struct GroupSet {
    PromptGroup subject, object, interaction;
};

struct BuildOptions {
    int K = 8;
    int L = 16;
    int e = 32;
    bool use_priors = true;   // seed object/interaction prompts from the text encoder
    bool hoi_design = true;   // tailored structures: anonymous subjects, composite pair text
    int n_placeholders = 8;   // frozen placeholder tokens for unseen pairs
    std::set<int> unseen_pairs;
};

// Deterministic given (categories, store seed, options). Throws ConfigError
// on duplicate category names or malformed pair indices.
GroupSet build_groups(numcore::ParamStore& store, const textenc::Vocab& vocab,
                      const hoidist::CategorySet& cats, const BuildOptions& opt);

}  // namespace promptspace
