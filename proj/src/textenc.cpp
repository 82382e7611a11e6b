#include "hoidist/textenc.hpp"

#include <algorithm>
#include <cctype>

#include "hoidist/errors.hpp"

namespace textenc {

using numcore::Rng;
using numcore::Tensor;

Vocab::Vocab(int embed_dim, uint64_t seed) : embed_dim_(embed_dim), seed_(seed) {
    if (embed_dim <= 0)
        throw hoidist::ConfigError("embedding dimension must be positive");
}

std::vector<int> Vocab::tokenize(const std::string& text) const {
    std::vector<int> ids;
    std::string word;
    auto flush = [&]() {
        if (word.empty())
            return;
        // FNV-1a over the lowercase word
        uint64_t h = 14695981039346656037ull;
        for (char c : word) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        ids.push_back(kNumSpecials + static_cast<int>(h % (kTableSize - kNumSpecials)));
        word.clear();
    };
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c)))
            flush();
        else
            word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    flush();
    return ids;
}

std::vector<double> Vocab::embedding(int token_id) const {
    Rng stream = Rng(seed_).substream(static_cast<uint64_t>(token_id));
    std::vector<double> e(static_cast<size_t>(embed_dim_));
    for (auto& v : e)
        v = stream.gaussian() * 0.1;
    return e;
}

std::vector<uint8_t> TokenizedPrompt::learnable_elements(int embed_dim) const {
    std::vector<uint8_t> m;
    m.reserve(frozen_mask.size() * static_cast<size_t>(embed_dim));
    for (uint8_t f : frozen_mask)
        m.insert(m.end(), static_cast<size_t>(embed_dim), f ? uint8_t{0} : uint8_t{1});
    return m;
}

namespace {

TokenizedPrompt assemble(const Vocab& vocab, const std::vector<int>& prefix_ids, int L,
                         Rng& init_rng) {
    const int e = vocab.embed_dim();
    const int M = L - static_cast<int>(prefix_ids.size()) - 1;  // END takes the last frozen slot
    if (M < 1)
        throw hoidist::ConfigError("prompt content of " + std::to_string(prefix_ids.size()) +
                                   " tokens leaves no learnable slot at L=" + std::to_string(L));

    TokenizedPrompt p;
    p.learnable_count = M;
    p.token_ids.reserve(static_cast<size_t>(L));
    p.frozen_mask.assign(static_cast<size_t>(L), 0);
    std::vector<double> data;
    data.reserve(static_cast<size_t>(L) * e);

    int pos = 0;
    for (int id : prefix_ids) {
        p.token_ids.push_back(id);
        p.frozen_mask[pos++] = 1;
        const auto emb = vocab.embedding(id);
        data.insert(data.end(), emb.begin(), emb.end());
    }
    for (int i = 0; i < M; ++i) {
        p.token_ids.push_back(kPad);
        for (int j = 0; j < e; ++j)
            data.push_back(init_rng.gaussian() * 0.02);
        ++pos;
    }
    p.token_ids.push_back(kEnd);
    p.frozen_mask[pos] = 1;
    const auto end_emb = vocab.embedding(kEnd);
    data.insert(data.end(), end_emb.begin(), end_emb.end());

    p.embeddings = Tensor::from_data({L, e}, std::move(data));
    return p;
}

}  // namespace

TokenizedPrompt encode_category(const Vocab& vocab, const std::string& description, int L,
                                Rng& init_rng) {
    std::vector<int> prefix{kStart};
    const auto words = vocab.tokenize(description);
    prefix.insert(prefix.end(), words.begin(), words.end());
    return assemble(vocab, prefix, L, init_rng);
}

TokenizedPrompt placeholder_prompt(const Vocab& vocab, int L, int n_placeholders,
                                   Rng& init_rng) {
    if (n_placeholders < 0 || n_placeholders + 2 > L)
        throw hoidist::ConfigError("placeholder count " + std::to_string(n_placeholders) +
                                   " does not fit in L=" + std::to_string(L));
    std::vector<int> prefix{kStart};
    prefix.insert(prefix.end(), static_cast<size_t>(n_placeholders), kPlaceholder);
    return assemble(vocab, prefix, L, init_rng);
}

}  // namespace textenc
