#pragma once

#include <string>

#include "hoidist/numcore/ops.hpp"
#include "hoidist/numcore/param_store.hpp"
#include "hoidist/promptspace.hpp"

// Gaussian category distributions over prompt collections: estimation,
// learnable category aggregation, and guidance sampling.
namespace distengine {

using numcore::Rng;
using numcore::Tensor;

struct CategoryDistribution {
    Tensor mu;     // L x e
    Tensor sigma;  // L x e, elementwise population std (>= 0)
};

enum class SampleStrategy { reparam_gamma, reparam_vae, repeat_mu, naive_maxpool };
enum class SpaceBasis { gaussian, naive, fourier };

SampleStrategy parse_strategy(const std::string& s);
SpaceBasis parse_basis(const std::string& s);
const char* strategy_name(SampleStrategy s);
const char* basis_name(SpaceBasis b);

// Persistent learnable pieces of one distribution space.
struct SpaceParams {
    promptspace::GroupKind kind;
    Tensor agg_weights;  // N' x N
    Tensor gamma;        // raw scalar; |gamma| is the effective noise scale
    int N = 0, N_prime = 0, N_s = 0;
};

SpaceParams build_space_params(numcore::ParamStore& store, promptspace::GroupKind kind, int N,
                               int N_prime, int N_s, double gamma_init);

// One space assembled for a forward pass: aggregated blocks plus the
// distributions estimated from them.
struct DistributionSpace {
    promptspace::GroupKind kind;
    Tensor aggregated;  // N' x K x L x e
    Tensor mu;          // N' x L x e
    Tensor sigma;       // N' x L x e
    Tensor gamma;       // scalar
    int N_s = 0;
};

struct GuidanceSample {
    Tensor raw;     // N' x N_s x L x e
    Tensor pooled;  // N' x N_s x e, token-mean of raw
};

// Elementwise mean and population std over the K axis. K >= 2 required.
CategoryDistribution estimate(const Tensor& block);

// Same, vectorised over a leading category axis: N x K x L x e -> N x L x e.
std::pair<Tensor, Tensor> estimate_stack(const Tensor& blocks);

// Linear combination along the category axis only.
Tensor aggregate(const Tensor& blocks, const Tensor& weights);

// Stacks the masked collection blocks of a group (N x K x L x e).
Tensor stack_group(const promptspace::PromptGroup& group);

// Aggregate + re-estimate with the space's learnable weights.
DistributionSpace assemble_space(const SpaceParams& params,
                                 const promptspace::PromptGroup& group);

GuidanceSample sample(const DistributionSpace& space, SampleStrategy strategy, Rng& rng);

// Deterministic guidance from the low-frequency DFT of the K-pooled
// aggregated block along the token axis. Components are ordered
// [Re f=0 .. floor(L/2), Im f=1 .. ceil(L/2)-1], normalised by 1/L, each
// broadcast across the token axis so pooled == component. Needs N_s <= L.
GuidanceSample fourier_guidance(const DistributionSpace& space);

// Basis dispatch: gaussian -> sample(strategy), naive -> max-pool sampling,
// fourier -> fourier_guidance.
GuidanceSample guidance(const DistributionSpace& space, SpaceBasis basis, SampleStrategy strategy,
                        Rng& rng);

}  // namespace distengine
