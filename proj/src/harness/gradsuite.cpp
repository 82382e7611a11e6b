#include "hoidist/harness/gradsuite.hpp"

#include "hoidist/harness/train.hpp"
#include "hoidist/numcore/gradcheck.hpp"
#include "hoidist/synthworld.hpp"

namespace harness {

namespace nc = numcore;
namespace de = distengine;
using nc::Rng;
using nc::Tensor;

namespace {

constexpr double kTol = 1e-5;

Tensor random_tensor(Rng& rng, const nc::Shape& shape, bool rg = true) {
    Tensor t = Tensor::zeros(shape, rg);
    for (auto& v : t.mutable_data())
        v = rng.uniform() * 2.0 - 1.0;
    return t;
}

GradSuiteCheck check_loss_do(ortho::Variant variant, uint64_t seed) {
    Rng rng(seed);
    std::vector<Tensor> cats;
    std::vector<nc::GradCheckInput> inputs;
    for (int i = 0; i < 3; ++i) {
        Tensor t = random_tensor(rng, {4, 6});
        cats.push_back(t);
        inputs.push_back({"cat" + std::to_string(i), t, {}});
    }
    ortho::ConstraintConfig cfg;
    cfg.alpha = Tensor::scalar(0.5, true);
    cfg.epsilon = 1e-8;
    cfg.variant = variant;
    inputs.push_back({"alpha", cfg.alpha, {}});

    auto report = nc::gradcheck([&]() { return ortho::loss_do(cats, cfg); }, inputs, kTol);
    return {std::string("loss_do ") + ortho::variant_name(variant), report.max_rel_err,
            report.pass};
}

GradSuiteCheck check_sampling_path(uint64_t seed) {
    Rng rng(seed);
    Tensor mu = random_tensor(rng, {3, 2, 4});
    Tensor sigma = random_tensor(rng, {3, 2, 4});
    for (auto& v : sigma.mutable_data())
        v = std::fabs(v) + 0.3;
    Tensor gamma = Tensor::scalar(0.01, true);
    Rng frozen(seed ^ 0xf00d);
    Tensor noise = nc::gaussian(frozen, {3, 2, 2, 4});

    auto f = [&]() {
        Tensor mu1 = nc::reshape(mu, {3, 1, 2, 4});
        Tensor sigma1 = nc::reshape(sigma, {3, 1, 2, 4});
        Tensor raw = nc::add(mu1, nc::mul(nc::mul(nc::abs(gamma), noise), sigma1));
        Tensor pooled = nc::mean(raw, 2, false);
        return nc::mean(nc::mul(pooled, pooled));
    };
    auto report = nc::gradcheck(f, {{"mu", mu}, {"sigma", sigma}, {"gamma", gamma}}, kTol);
    return {"sampling path (frozen noise)", report.max_rel_err, report.pass};
}

GradSuiteCheck check_aggregation(uint64_t seed) {
    Rng rng(seed);
    Tensor blocks = random_tensor(rng, {4, 3, 2, 3});
    Tensor weights = random_tensor(rng, {2, 4});
    auto f = [&]() {
        Tensor agg = de::aggregate(blocks, weights);
        auto [mu, sg] = de::estimate_stack(agg);
        return nc::add(nc::mean(nc::mul(mu, mu)), nc::mean(nc::mul(sg, sg)));
    };
    auto report = nc::gradcheck(f, {{"blocks", blocks}, {"weights", weights}}, kTol);
    return {"aggregation + estimation", report.max_rel_err, report.pass};
}

RunConfig tiny_config(uint64_t seed) {
    RunConfig cfg;
    cfg.model.C = 16;
    cfg.model.heads = 2;
    cfg.model.encoder_layers = 1;
    cfg.model.instance_decoder_layers = 1;
    cfg.model.interaction_decoder_layers = 1;
    cfg.model.N_q = 6;
    cfg.model.N_s = 2;
    cfg.model.grid = 6;
    cfg.dist.K = 4;
    cfg.dist.L = 12;
    cfg.dist.e = 8;
    cfg.train.seed = seed;
    return cfg;
}

GradSuiteCheck check_composition(uint64_t seed) {
    RunConfig cfg = tiny_config(seed);
    auto cats = synthworld::default_categories();
    Pipeline pipe = Pipeline::build(cfg, cats, {});

    Rng rng(seed ^ 0xc0);
    const int Q = cfg.model.n_queries();
    const int e = cfg.dist.e;
    de::GuidanceSample sub, obj, inter;
    sub.pooled = random_tensor(rng, {cfg.model.N_q, cfg.model.N_s, e});
    obj.pooled = random_tensor(rng, {cfg.model.N_q, cfg.model.N_s, e});
    inter.pooled = random_tensor(rng, {cfg.model.N_q, cfg.model.N_s, e});

    std::vector<nc::GradCheckInput> inputs = {
        {"sub", sub.pooled},
        {"obj", obj.pooled},
        {"int", inter.pooled},
        {"q_ins", pipe.model->query_ins()},
        {"w_ins", pipe.store->get("det.guide_ins.w")},
        {"w_int", pipe.store->get("det.guide_int.w")},
    };
    auto f = [&]() {
        auto [qi, qt] = pipe.model->compose_queries(pipe.model->query_ins(),
                                                    pipe.model->query_int(), sub, obj, inter);
        return nc::add(nc::mean(nc::mul(qi, qi)), nc::mean(nc::mul(qt, qt)));
    };
    auto report = nc::gradcheck(f, inputs, kTol, 24, seed);
    (void)Q;
    return {"query composition", report.max_rel_err, report.pass};
}

GradSuiteCheck check_full_objective(uint64_t seed) {
    RunConfig cfg = tiny_config(seed);
    auto cats = synthworld::default_categories();
    Pipeline pipe = Pipeline::build(cfg, cats, {});

    // two-scene batch
    synthworld::SplitSpec split;
    split.profile = synthworld::Profile::uniform;
    auto scenes = synthworld::generate(cats, 2, seed, split, true);
    Dataset ds;
    ds.cats = cats;
    for (const auto& s : scenes) {
        ds.scenes.push_back(s);
        ds.features.push_back(synthworld::rasterize(s, cfg.model.grid, cats.n_objects()));
        ds.targets.push_back(targets_of(s));
    }

    std::vector<nc::GradCheckInput> inputs;
    for (const auto& [name, t] : pipe.store->entries())
        inputs.push_back({name, t, pipe.store->mask(name)});

    auto f = [&]() {
        Rng frozen(seed ^ 0x5eed);  // same noise stream on every call
        return pipe.batch_loss(ds, {0, 1}, frozen);
    };
    auto report = nc::gradcheck(f, inputs, kTol, 3, seed);
    return {"full objective (2-scene batch)", report.max_rel_err, report.pass};
}

}  // namespace

GradSuiteResult run_grad_suite(uint64_t seed) {
    GradSuiteResult result;
    result.tolerance = kTol;
    result.checks.push_back(check_loss_do(ortho::Variant::dynamic, seed));
    result.checks.push_back(check_loss_do(ortho::Variant::fixed_margin, seed + 1));
    result.checks.push_back(check_loss_do(ortho::Variant::hard_contrastive, seed + 2));
    result.checks.push_back(check_sampling_path(seed));
    result.checks.push_back(check_aggregation(seed));
    result.checks.push_back(check_composition(seed));
    result.checks.push_back(check_full_objective(seed));
    result.pass = true;
    for (const auto& c : result.checks)
        result.pass = result.pass && c.pass;
    return result;
}

}  // namespace harness
