#include "hoidist/distengine.hpp"

#include <cmath>

namespace distengine {

namespace nc = numcore;
using hoidist::ConfigError;
using hoidist::ContractViolation;

SampleStrategy parse_strategy(const std::string& s) {
    if (s == "reparam_gamma")
        return SampleStrategy::reparam_gamma;
    if (s == "reparam_vae")
        return SampleStrategy::reparam_vae;
    if (s == "repeat_mu")
        return SampleStrategy::repeat_mu;
    if (s == "naive_maxpool")
        return SampleStrategy::naive_maxpool;
    throw ConfigError("unknown sampling strategy: " + s);
}

SpaceBasis parse_basis(const std::string& s) {
    if (s == "gaussian")
        return SpaceBasis::gaussian;
    if (s == "naive")
        return SpaceBasis::naive;
    if (s == "fourier")
        return SpaceBasis::fourier;
    throw ConfigError("unknown space basis: " + s);
}

const char* strategy_name(SampleStrategy s) {
    switch (s) {
        case SampleStrategy::reparam_gamma: return "reparam_gamma";
        case SampleStrategy::reparam_vae: return "reparam_vae";
        case SampleStrategy::repeat_mu: return "repeat_mu";
        case SampleStrategy::naive_maxpool: return "naive_maxpool";
    }
    return "?";
}

const char* basis_name(SpaceBasis b) {
    switch (b) {
        case SpaceBasis::gaussian: return "gaussian";
        case SpaceBasis::naive: return "naive";
        case SpaceBasis::fourier: return "fourier";
    }
    return "?";
}

SpaceParams build_space_params(numcore::ParamStore& store, promptspace::GroupKind kind, int N,
                               int N_prime, int N_s, double gamma_init) {
    if (N < 1 || N_prime < 1 || N_s < 1)
        throw ConfigError("distribution space needs N, N', N_s >= 1");
    SpaceParams p;
    p.kind = kind;
    p.N = N;
    p.N_prime = N_prime;
    p.N_s = N_s;

    const std::string prefix = std::string("dist.") + promptspace::group_name(kind);
    nc::Rng init(store.rng_seed() ^ 0xa99e5ull);
    init = init.substream(static_cast<uint64_t>(kind));
    Tensor w = Tensor::zeros({N_prime, N});
    const double scale = 1.0 / std::sqrt(static_cast<double>(N));
    for (auto& v : w.mutable_data())
        v = init.gaussian() * scale;
    p.agg_weights = store.create(prefix + ".agg", w);
    p.gamma = store.create(prefix + ".gamma", Tensor::scalar(gamma_init));
    return p;
}

CategoryDistribution estimate(const Tensor& block) {
    if (block.shape().size() != 3)
        throw ContractViolation("estimate expects a K x L x e block, got " +
                                nc::shape_str(block.shape()));
    if (block.shape()[0] < 2)
        throw ConfigError("distribution estimation needs K >= 2 prompts, got " +
                          std::to_string(block.shape()[0]));
    CategoryDistribution d;
    d.mu = nc::mean(block, 0, false);
    Tensor centered = nc::sub(block, nc::mean(block, 0, true));
    d.sigma = nc::sqrt(nc::mean(nc::mul(centered, centered), 0, false));
    return d;
}

std::pair<Tensor, Tensor> estimate_stack(const Tensor& blocks) {
    if (blocks.shape().size() != 4)
        throw ContractViolation("estimate_stack expects N x K x L x e, got " +
                                nc::shape_str(blocks.shape()));
    if (blocks.shape()[1] < 2)
        throw ConfigError("distribution estimation needs K >= 2 prompts, got " +
                          std::to_string(blocks.shape()[1]));
    Tensor mu = nc::mean(blocks, 1, false);
    Tensor centered = nc::sub(blocks, nc::mean(blocks, 1, true));
    Tensor sigma = nc::sqrt(nc::mean(nc::mul(centered, centered), 1, false));
    return {mu, sigma};
}

Tensor aggregate(const Tensor& blocks, const Tensor& weights) {
    if (blocks.shape().size() != 4 || weights.shape().size() != 2 ||
        weights.shape()[1] != blocks.shape()[0])
        throw ContractViolation("aggregate shape mismatch: blocks " + nc::shape_str(blocks.shape()) +
                                ", weights " + nc::shape_str(weights.shape()));
    const int64_t n = blocks.shape()[0];
    const int64_t rest = blocks.numel() / n;
    Tensor flat = nc::reshape(blocks, {n, rest});
    Tensor out = nc::matmul(weights, flat);
    return nc::reshape(out, {weights.shape()[0], blocks.shape()[1], blocks.shape()[2],
                             blocks.shape()[3]});
}

Tensor stack_group(const promptspace::PromptGroup& group) {
    if (group.collections.empty())
        throw ContractViolation("cannot stack an empty prompt group");
    std::vector<Tensor> parts;
    parts.reserve(group.collections.size());
    for (const auto& col : group.collections) {
        Tensor b = col.masked_block();
        parts.push_back(nc::reshape(b, {1, col.K, col.L, col.e}));
    }
    return parts.size() == 1 ? parts[0] : nc::concat(parts, 0);
}

DistributionSpace assemble_space(const SpaceParams& params,
                                 const promptspace::PromptGroup& group) {
    DistributionSpace s;
    s.kind = params.kind;
    s.N_s = params.N_s;
    s.gamma = params.gamma;
    s.aggregated = aggregate(stack_group(group), params.agg_weights);
    auto [mu, sigma] = estimate_stack(s.aggregated);
    s.mu = mu;
    s.sigma = sigma;
    return s;
}

namespace {

GuidanceSample finish(Tensor raw) {
    GuidanceSample g;
    g.raw = raw;
    g.pooled = nc::mean(raw, 2, false);
    return g;
}

// mu broadcast to N' x N_s x L x e without touching values.
Tensor repeat_over_samples(const Tensor& t, int n_s) {
    const auto& s = t.shape();
    Tensor un = nc::reshape(t, {s[0], 1, s[1], s[2]});
    Tensor zero = Tensor::zeros({s[0], n_s, s[1], s[2]});
    return nc::add(un, zero);
}

}  // namespace

GuidanceSample sample(const DistributionSpace& space, SampleStrategy strategy, Rng& rng) {
    const auto& ms = space.mu.shape();  // N' x L x e
    const int64_t n_prime = ms[0], L = ms[1], e = ms[2];
    Tensor mu1 = nc::reshape(space.mu, {n_prime, 1, L, e});
    Tensor sigma1 = nc::reshape(space.sigma, {n_prime, 1, L, e});

    switch (strategy) {
        case SampleStrategy::reparam_gamma: {
            Tensor noise = nc::gaussian(rng, {n_prime, space.N_s, L, e});
            Tensor scale = nc::abs(space.gamma);
            return finish(nc::add(mu1, nc::mul(nc::mul(scale, noise), sigma1)));
        }
        case SampleStrategy::reparam_vae: {
            Tensor noise = nc::gaussian(rng, {n_prime, space.N_s, L, e});
            return finish(nc::add(mu1, nc::mul(noise, sigma1)));
        }
        case SampleStrategy::repeat_mu:
            return finish(repeat_over_samples(space.mu, space.N_s));
        case SampleStrategy::naive_maxpool: {
            Tensor pooled = nc::max(space.aggregated, 1, false);  // N' x L x e
            return finish(repeat_over_samples(pooled, space.N_s));
        }
    }
    throw ConfigError("unknown sampling strategy");
}

GuidanceSample fourier_guidance(const DistributionSpace& space) {
    const auto& as = space.aggregated.shape();  // N' x K x L x e
    const int64_t n_prime = as[0], L = as[2], e = as[3];
    const int n_s = space.N_s;
    if (n_s > L)
        throw ContractViolation("fourier guidance needs N_s <= L");

    // Selection rows: DFT coefficients, lowest frequency first.
    const int64_t n_re = L / 2 + 1;
    Tensor sel = Tensor::zeros({n_s, L});
    {
        auto& d = sel.mutable_data();
        for (int i = 0; i < n_s; ++i) {
            const bool is_re = i < n_re;
            const int64_t f = is_re ? i : (i - n_re + 1);
            for (int64_t t = 0; t < L; ++t) {
                const double ang = 2.0 * M_PI * static_cast<double>(f) * static_cast<double>(t) /
                                   static_cast<double>(L);
                d[i * L + t] = (is_re ? std::cos(ang) : -std::sin(ang)) / static_cast<double>(L);
            }
        }
    }

    Tensor pooled_k = nc::mean(space.aggregated, 1, false);  // N' x L x e
    std::vector<Tensor> comps;
    comps.reserve(static_cast<size_t>(n_prime));
    for (int64_t n = 0; n < n_prime; ++n) {
        Tensor block = nc::reshape(nc::slice(pooled_k, 0, n, 1), {L, e});
        comps.push_back(nc::reshape(nc::matmul(sel, block), {1, n_s, 1, e}));
    }
    Tensor comp = comps.size() == 1 ? comps[0] : nc::concat(comps, 0);  // N' x N_s x 1 x e
    Tensor raw = nc::add(comp, Tensor::zeros({n_prime, n_s, L, e}));
    return finish(raw);
}

GuidanceSample guidance(const DistributionSpace& space, SpaceBasis basis, SampleStrategy strategy,
                        Rng& rng) {
    switch (basis) {
        case SpaceBasis::gaussian:
            return sample(space, strategy, rng);
        case SpaceBasis::naive:
            return sample(space, SampleStrategy::naive_maxpool, rng);
        case SpaceBasis::fourier:
            return fourier_guidance(space);
    }
    throw ConfigError("unknown space basis");
}

}  // namespace distengine
