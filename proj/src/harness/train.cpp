#include "hoidist/harness/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "hoidist/harness/optimizer.hpp"
#include "hoidist/harness/reports.hpp"
#include "hoidist/numcore/checkpoint.hpp"
#include "hoidist/synthworld.hpp"

namespace harness {

namespace nc = numcore;
namespace de = distengine;
using detector::QueryOutputs;
using nc::Rng;
using nc::Tensor;

Pipeline Pipeline::build(const RunConfig& cfg, const hoidist::CategorySet& cats,
                         const std::set<int>& unseen_pairs) {
    cfg.validate();
    Pipeline p;
    p.cfg = cfg;
    p.cats = cats;
    p.store = std::make_unique<nc::ParamStore>(cfg.train.seed);
    p.vocab = std::make_unique<textenc::Vocab>(cfg.dist.e);

    p.has_prompts = cfg.dist.use_prompts && !cfg.pattern.enabled;
    p.has_constraint = p.has_prompts || cfg.pattern.enabled;

    if (p.has_prompts) {
        promptspace::BuildOptions opt;
        opt.K = cfg.dist.K;
        opt.L = cfg.dist.L;
        opt.e = cfg.dist.e;
        opt.use_priors = cfg.dist.use_priors;
        opt.hoi_design = cfg.dist.hoi_design;
        opt.n_placeholders = cfg.dist.n_placeholders;
        opt.unseen_pairs = unseen_pairs;
        p.groups = promptspace::build_groups(*p.store, *p.vocab, cats, opt);

        const int n_prime = cfg.model.N_q;
        p.sub_space = de::build_space_params(*p.store, promptspace::GroupKind::subject,
                                             p.groups.subject.N(), n_prime, cfg.model.N_s,
                                             cfg.dist.gamma_init);
        p.obj_space = de::build_space_params(*p.store, promptspace::GroupKind::object,
                                             p.groups.object.N(), n_prime, cfg.model.N_s,
                                             cfg.dist.gamma_init);
        p.int_space = de::build_space_params(*p.store, promptspace::GroupKind::interaction,
                                             p.groups.interaction.N(), n_prime, cfg.model.N_s,
                                             cfg.dist.gamma_init);
    }
    if (p.has_constraint)
        p.constraint = ortho::build_constraint(*p.store, cfg.dist.alpha_init, cfg.loss.epsilon,
                                               ortho::parse_variant(cfg.loss.variant),
                                               cfg.loss.lambda_do);
    p.constraint.l1_norms = cfg.dist.l1_norms;

    const int c_in = synthworld::feature_channels(cats.n_objects());
    p.model = std::make_unique<detector::Model>(*p.store, cfg.model, c_in, cats.n_objects(),
                                                cats.n_pairs(), cfg.dist.e,
                                                /*own_queries=*/!cfg.pattern.enabled);
    if (cfg.pattern.enabled) {
        p.grid_ins = detector::make_query_grid(*p.store, "pat.query_ins", cfg.model.N_q,
                                               cfg.pattern.N_p, cfg.model.C);
        p.grid_int = detector::make_query_grid(*p.store, "pat.query_int", cfg.model.N_q,
                                               cfg.pattern.N_p, cfg.model.C);
    }
    return p;
}

de::GuidanceSample Pipeline::group_guidance(const de::SpaceParams& params,
                                            const promptspace::PromptGroup& group,
                                            Rng& noise_rng) const {
    Tensor agg = de::aggregate(de::stack_group(group), params.agg_weights);
    if (!cfg.dist.use_distribution) {
        // raw prompt pooling, no distribution machinery
        Tensor mu = nc::mean(agg, 1, false);
        const auto& s = mu.shape();
        Tensor un = nc::reshape(mu, {s[0], 1, s[1], s[2]});
        de::GuidanceSample g;
        g.raw = nc::add(un, Tensor::zeros({s[0], params.N_s, s[1], s[2]}));
        g.pooled = nc::mean(g.raw, 2, false);
        return g;
    }
    de::DistributionSpace space;
    space.kind = params.kind;
    space.aggregated = agg;
    auto [mu, sigma] = de::estimate_stack(agg);
    space.mu = mu;
    space.sigma = sigma;
    space.gamma = params.gamma;
    space.N_s = params.N_s;
    return de::guidance(space, de::parse_basis(cfg.dist.basis),
                        de::parse_strategy(cfg.dist.strategy), noise_rng);
}

std::pair<Tensor, Tensor> Pipeline::make_queries(Rng& noise_rng) const {
    if (cfg.pattern.enabled)
        return {grid_ins.queries(), grid_int.queries()};
    if (!has_prompts)
        return {model->query_ins(), model->query_int()};
    auto sub = group_guidance(sub_space, groups.subject, noise_rng);
    auto obj = group_guidance(obj_space, groups.object, noise_rng);
    auto inter = group_guidance(int_space, groups.interaction, noise_rng);
    return model->compose_queries(model->query_ins(), model->query_int(), sub, obj, inter);
}

Tensor Pipeline::ortho_loss() const {
    if (!has_constraint)
        return Tensor::scalar(0.0);
    std::vector<Tensor> obj_means, int_means;
    if (cfg.pattern.enabled) {
        obj_means = grid_ins.category_rows();
        int_means = grid_int.category_rows();
    } else {
        for (const auto& col : groups.object.collections)
            obj_means.push_back(col.pooled_mean());
        for (const auto& col : groups.interaction.collections)
            int_means.push_back(col.pooled_mean());
    }
    return nc::add(ortho::loss_do(obj_means, constraint), ortho::loss_do(int_means, constraint));
}

Tensor Pipeline::batch_loss(const Dataset& ds, const std::vector<int>& idx, Rng& noise_rng,
                            BatchStats* stats) const {
    auto [q_ins, q_int] = make_queries(noise_rng);
    std::vector<Tensor> scene_losses;
    scene_losses.reserve(idx.size());
    const detector::LossWeights w = cfg.loss.weights();
    for (int i : idx) {
        auto det = model->forward(ds.features[static_cast<size_t>(i)], q_ins, q_int);
        auto outs = detector::to_query_outputs(det);
        auto assignment = detector::hungarian_match(outs, ds.targets[static_cast<size_t>(i)],
                                                    w.cost());
        scene_losses.push_back(detector::hoi_loss(det, ds.targets[static_cast<size_t>(i)],
                                                  assignment, w, ds.cats.n_objects(),
                                                  ds.cats.n_pairs()));
    }
    Tensor hoi = scene_losses[0];
    for (size_t k = 1; k < scene_losses.size(); ++k)
        hoi = nc::add(hoi, scene_losses[k]);
    hoi = nc::mul(hoi, 1.0 / static_cast<double>(scene_losses.size()));

    Tensor total = hoi;
    double ldo_value = 0.0;
    if (has_constraint) {
        Tensor ldo = ortho_loss();
        ldo_value = ldo.item();
        total = nc::add(hoi, nc::mul(ldo, cfg.loss.lambda_do));
    }
    if (stats) {
        stats->loss_total = total.item();
        stats->loss_hoi = hoi.item();
        stats->loss_do = ldo_value;
    }
    return total;
}

std::vector<QueryOutputs> Pipeline::infer_all(const Dataset& ds, Rng eval_rng) const {
    nc::NoGradGuard guard;
    auto [q_ins, q_int] = make_queries(eval_rng);
    std::vector<QueryOutputs> out;
    out.reserve(ds.size());
    for (size_t i = 0; i < ds.size(); ++i)
        out.push_back(detector::to_query_outputs(model->forward(ds.features[i], q_ins, q_int)));
    return out;
}

double Pipeline::gamma_value(const de::SpaceParams& p) const {
    return has_prompts ? p.gamma.data()[0] : 0.0;
}

double Pipeline::alpha_value() const {
    return has_constraint ? constraint.alpha.data()[0] : 0.0;
}

namespace {

const std::vector<std::string> kMetricColumns = {
    "epoch",     "lr",        "loss_total", "loss_hoi",    "loss_do",
    "gamma_sub", "gamma_obj", "gamma_int",  "alpha",       "map_full",
    "map_rare",  "map_nonrare", "map_unseen", "map_seen"};

std::vector<double> snapshot(const nc::ParamStore& store) {
    std::vector<double> all;
    for (const auto& [name, t] : store.entries())
        all.insert(all.end(), t.data().begin(), t.data().end());
    return all;
}

void restore(nc::ParamStore& store, const std::vector<double>& snap) {
    size_t off = 0;
    for (const auto& [name, t] : store.entries()) {
        auto& v = t.raw()->value;
        std::copy(snap.begin() + off, snap.begin() + off + v.size(), v.begin());
        off += v.size();
    }
}

}  // namespace

TrainResult train(const RunConfig& cfg, const std::string& data_dir, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    Dataset train_ds = load_dataset(data_dir, "train.jsonl", cfg.model.grid, cfg.train.max_scenes);
    Dataset test_ds = load_dataset(data_dir, "test.jsonl", cfg.model.grid);
    if (train_ds.size() == 0)
        throw hoidist::ConfigError("empty training set in " + data_dir);

    Pipeline pipe = Pipeline::build(cfg, train_ds.cats, train_ds.manifest.unseen_pairs);
    AdamW opt(*pipe.store, cfg.train.lr, 0.9, 0.999, 1e-8, cfg.train.weight_decay);
    Rng noise = Rng(cfg.train.seed).substream(0x7a17);

    const std::string metrics_path = (fs::path(out_dir) / "metrics.csv").string();
    CsvWriter metrics(metrics_path, kMetricColumns);

    TrainResult result;
    result.metrics_file = metrics_path;
    result.checkpoint_file = (fs::path(out_dir) / "model.ckpt").string();
    result.param_count = pipe.store->param_count();

    std::vector<int> order(train_ds.size());
    for (size_t i = 0; i < order.size(); ++i)
        order[i] = static_cast<int>(i);

    std::vector<double> last_good = snapshot(*pipe.store);
    for (int epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
        opt.set_lr(cfg.train.lr * (epoch > cfg.train.decay_epoch ? cfg.train.lr_decay : 1.0));

        Rng shuffle = Rng(cfg.train.seed).substream(0xec).substream(static_cast<uint64_t>(epoch));
        for (size_t k = order.size(); k > 1; --k)
            std::swap(order[k - 1], order[shuffle.next_u64() % k]);

        double epoch_loss = 0.0, epoch_hoi = 0.0, epoch_do = 0.0;
        int n_batches = 0;
        for (size_t start = 0; start < order.size(); start += cfg.train.batch_size) {
            const size_t stop = std::min(order.size(), start + cfg.train.batch_size);
            std::vector<int> batch(order.begin() + start, order.begin() + stop);

            pipe.store->zero_grad();
            Pipeline::BatchStats stats;
            Tensor loss;
            try {
                loss = pipe.batch_loss(train_ds, batch, noise, &stats);
            } catch (const hoidist::NumericalError& e) {
                restore(*pipe.store, last_good);
                numcore::save_checkpoint(*pipe.store, (fs::path(out_dir) / "abort.ckpt").string());
                throw hoidist::NumericalError(std::string(e.what()) + " at epoch " +
                                              std::to_string(epoch) +
                                              "; last good state saved to abort.ckpt");
            }
            if (!std::isfinite(stats.loss_total)) {
                restore(*pipe.store, last_good);
                numcore::save_checkpoint(*pipe.store, (fs::path(out_dir) / "abort.ckpt").string());
                throw hoidist::NumericalError("non-finite loss at epoch " + std::to_string(epoch) +
                                              "; last good state saved to abort.ckpt");
            }
            nc::backward(loss);
            last_good = snapshot(*pipe.store);
            opt.step();

            epoch_loss += stats.loss_total;
            epoch_hoi += stats.loss_hoi;
            epoch_do += stats.loss_do;
            ++n_batches;
        }
        epoch_loss /= n_batches;
        epoch_hoi /= n_batches;
        epoch_do /= n_batches;
        if (epoch == 1)
            result.first_epoch_loss = epoch_loss;
        result.final_epoch_loss = epoch_loss;

        EvalResult ev;
        const bool do_eval = cfg.train.eval_every > 0 &&
                             (epoch % cfg.train.eval_every == 0 || epoch == cfg.train.epochs);
        if (do_eval && test_ds.size() > 0) {
            auto dets = pipe.infer_all(test_ds, Rng(cfg.train.seed).substream(kEvalNoiseTag));
            ev = evaluate_map(dets, test_ds.targets, test_ds.cats, test_ds.manifest.rare_pairs,
                              test_ds.manifest.unseen_pairs);
            result.final_eval = ev;
        }
        metrics.row({fmt(static_cast<int64_t>(epoch)), fmt(opt.lr()), fmt(epoch_loss),
                     fmt(epoch_hoi), fmt(epoch_do), fmt(pipe.gamma_value(pipe.sub_space)),
                     fmt(pipe.gamma_value(pipe.obj_space)), fmt(pipe.gamma_value(pipe.int_space)),
                     fmt(pipe.alpha_value()), fmt(ev.map_full), fmt(ev.map_rare),
                     fmt(ev.map_nonrare), fmt(ev.map_unseen), fmt(ev.map_seen)});
    }

    numcore::save_checkpoint(*pipe.store, result.checkpoint_file);
    return result;
}

EvalResult evaluate_checkpoint(const RunConfig& cfg, const std::string& checkpoint,
                               const std::string& data_dir) {
    Dataset test_ds = load_dataset(data_dir, "test.jsonl", cfg.model.grid);
    if (test_ds.size() == 0)
        throw hoidist::ConfigError("empty test set in " + data_dir);
    Pipeline pipe = Pipeline::build(cfg, test_ds.cats, test_ds.manifest.unseen_pairs);
    numcore::load_checkpoint(*pipe.store, checkpoint);
    auto dets = pipe.infer_all(test_ds, Rng(cfg.train.seed).substream(kEvalNoiseTag));
    return evaluate_map(dets, test_ds.targets, test_ds.cats, test_ds.manifest.rare_pairs,
                        test_ds.manifest.unseen_pairs);
}

}  // namespace harness
