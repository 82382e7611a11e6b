#include "hoidist/promptspace.hpp"

#include <algorithm>

namespace promptspace {

using numcore::Rng;
using numcore::Shape;
using numcore::Tensor;

const char* group_name(GroupKind g) {
    switch (g) {
        case GroupKind::subject: return "sub";
        case GroupKind::object: return "obj";
        case GroupKind::interaction: return "int";
    }
    return "?";
}

Tensor PromptCollection::masked_block() const {
    return numcore::mask_grad(block, element_mask());
}

Tensor PromptCollection::pooled_mean() const {
    return numcore::mean(masked_block(), 0, false);
}

std::vector<uint8_t> PromptCollection::element_mask() const {
    std::vector<uint8_t> m;
    m.reserve(frozen_kl.size() * static_cast<size_t>(e));
    for (uint8_t f : frozen_kl)
        m.insert(m.end(), static_cast<size_t>(e), f ? uint8_t{0} : uint8_t{1});
    return m;
}

namespace {

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s)
        out.push_back((std::isalnum(static_cast<unsigned char>(c))) ? static_cast<char>(std::tolower(static_cast<unsigned char>(c))) : '_');
    return out;
}

std::string pad3(int i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%03d", i);
    return buf;
}

// Stack K prompt layouts into one collection parameter. `prior` is empty for
// fully learnable collections.
PromptCollection make_collection(numcore::ParamStore& store, const textenc::Vocab& vocab,
                                 GroupKind group, int category_id, const std::string& label,
                                 const std::string& prior_text, bool placeholder, int n_placeholders,
                                 const BuildOptions& opt, Rng group_rng) {
    PromptCollection col;
    col.group = group;
    col.category_id = category_id;
    col.label = label;
    col.K = opt.K;
    col.L = opt.L;
    col.e = opt.e;
    col.param_name = std::string("prompt.") + group_name(group) + "." + pad3(category_id) + "_" +
                     sanitize(label);

    std::vector<double> data;
    data.reserve(static_cast<size_t>(opt.K) * opt.L * opt.e);
    col.frozen_kl.assign(static_cast<size_t>(opt.K) * opt.L, 0);

    const bool has_prior = placeholder || !prior_text.empty();
    for (int k = 0; k < opt.K; ++k) {
        Rng init = group_rng.substream(static_cast<uint64_t>(k));
        if (has_prior) {
            textenc::TokenizedPrompt p =
                placeholder ? textenc::placeholder_prompt(vocab, opt.L, n_placeholders, init)
                            : textenc::encode_category(vocab, prior_text, opt.L, init);
            data.insert(data.end(), p.embeddings.data().begin(), p.embeddings.data().end());
            for (int t = 0; t < opt.L; ++t)
                col.frozen_kl[static_cast<size_t>(k) * opt.L + t] = p.frozen_mask[t];
            if (placeholder)
                col.placeholder_count = n_placeholders;
        } else {
            for (int t = 0; t < opt.L * opt.e; ++t)
                data.push_back(init.gaussian() * 0.02);
        }
    }

    Tensor block = Tensor::from_data({opt.K, opt.L, opt.e}, std::move(data));
    col.block = store.create(col.param_name, block, col.element_mask());
    return col;
}

uint64_t group_tag(GroupKind g) {
    switch (g) {
        case GroupKind::subject: return 11;
        case GroupKind::object: return 13;
        case GroupKind::interaction: return 17;
    }
    return 0;
}

}  // namespace

GroupSet build_groups(numcore::ParamStore& store, const textenc::Vocab& vocab,
                      const hoidist::CategorySet& cats, const BuildOptions& opt) {
    cats.validate();
    if (opt.K < 1)
        throw hoidist::ConfigError("prompt collection needs K >= 1");
    for (int p : opt.unseen_pairs)
        if (p < 0 || p >= cats.n_pairs())
            throw hoidist::ConfigError("unseen pair index out of range: " + std::to_string(p));

    Rng base(store.rng_seed());
    GroupSet gs;
    gs.subject.kind = GroupKind::subject;
    gs.object.kind = GroupKind::object;
    gs.interaction.kind = GroupKind::interaction;

    // Subjects: one collection per object category (N_sub = N_obj). With the
    // tailored design they are anonymous and fully learnable; without it they
    // carry the literal "human" prior.
    for (int i = 0; i < cats.n_objects(); ++i) {
        const bool anonymous = opt.hoi_design || !opt.use_priors;
        Rng r = base.substream(group_tag(GroupKind::subject)).substream(static_cast<uint64_t>(i));
        gs.subject.collections.push_back(make_collection(
            store, vocab, GroupKind::subject, i, anonymous ? "anon" : "human",
            anonymous ? "" : "human", false, 0, opt, r));
    }

    for (int i = 0; i < cats.n_objects(); ++i) {
        Rng r = base.substream(group_tag(GroupKind::object)).substream(static_cast<uint64_t>(i));
        gs.object.collections.push_back(make_collection(
            store, vocab, GroupKind::object, i, cats.objects[i],
            opt.use_priors ? cats.objects[i] : "", false, 0, opt, r));
    }

    for (int p = 0; p < cats.n_pairs(); ++p) {
        const std::string text =
            opt.hoi_design ? cats.pair_text(p) : cats.interactions[cats.hoi_pairs[p].first];
        const bool unseen = opt.unseen_pairs.count(p) > 0;
        Rng r = base.substream(group_tag(GroupKind::interaction)).substream(static_cast<uint64_t>(p));
        gs.interaction.collections.push_back(make_collection(
            store, vocab, GroupKind::interaction, p, cats.pair_text(p),
            (opt.use_priors && !unseen) ? text : "", opt.use_priors && unseen,
            opt.n_placeholders, opt, r));
    }
    return gs;
}

}  // namespace promptspace
