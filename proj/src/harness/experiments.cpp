#include "hoidist/harness/experiments.hpp"

#include <cmath>
#include <filesystem>

#include "hoidist/harness/reports.hpp"
#include "hoidist/numcore/checkpoint.hpp"

namespace harness {

namespace fs = std::filesystem;
namespace nc = numcore;
using hoidist::ConfigError;

const std::vector<std::string> kAblationColumns = {
    "suite",    "variant", "K",          "N_s",        "lambda_do",  "strategy",
    "basis",    "loss_variant", "param_count", "map_full", "map_rare", "map_nonrare",
    "map_unseen", "map_seen"};

const std::vector<std::string> kSweepColumns = {
    "N_q", "N_p", "C", "query_params", "total_params", "map_full", "map_rare", "map_nonrare"};

std::vector<std::string> ablation_suites() {
    return {"components", "loss_variants", "sampling", "basis", "hyper"};
}

namespace {

struct AblationEntry {
    std::string variant;
    RunConfig cfg;
};

std::vector<AblationEntry> build_suite(const std::string& suite, const RunConfig& base) {
    std::vector<AblationEntry> rows;
    auto push = [&](const std::string& name, RunConfig c) { rows.push_back({name, std::move(c)}); };

    if (suite == "components") {
        // cumulative ladder from the bare detector to the full pipeline
        RunConfig c = base;
        c.dist.use_prompts = false;
        c.loss.lambda_do = 0.0;
        push("base", c);

        c = base;
        c.dist.use_prompts = true;
        c.dist.use_priors = false;
        c.dist.hoi_design = false;
        c.dist.use_distribution = false;
        c.loss.lambda_do = 0.0;
        push("+prompt_query", c);

        c.dist.use_distribution = true;
        c.dist.strategy = "reparam_vae";
        push("+distribution", c);

        c.dist.use_priors = true;
        push("+encoder_priors", c);

        c.loss.lambda_do = base.loss.lambda_do;
        push("+l_do", c);

        c.dist.strategy = "reparam_gamma";
        push("+reparam_gamma", c);

        c.dist.hoi_design = true;
        push("+prompt_design", c);
    } else if (suite == "loss_variants") {
        for (const char* v : {"dynamic", "fixed_margin", "hard_contrastive"}) {
            RunConfig c = base;
            c.loss.variant = v;
            push(v, c);
        }
    } else if (suite == "sampling") {
        for (const char* s : {"reparam_vae", "reparam_gamma", "repeat_mu"}) {
            RunConfig c = base;
            c.dist.basis = "gaussian";
            c.dist.strategy = s;
            push(s, c);
        }
    } else if (suite == "basis") {
        for (const char* b : {"naive", "gaussian", "fourier"}) {
            RunConfig c = base;
            c.dist.basis = b;
            push(b, c);
        }
    } else if (suite == "hyper") {
        // one knob per row; the others sit at the grid defaults K=2, N_s=2,
        // lambda=1e-2
        RunConfig grid_base = base;
        grid_base.dist.K = 2;
        grid_base.model.N_s = 2;
        grid_base.loss.lambda_do = 1e-2;
        for (int k : {2, 4, 8}) {
            RunConfig c = grid_base;
            c.dist.K = k;
            push("K=" + std::to_string(k), c);
        }
        for (int ns : {2, 4, 8}) {
            RunConfig c = grid_base;
            c.model.N_s = ns;
            push("N_s=" + std::to_string(ns), c);
        }
        for (double l : {1e-1, 5e-2, 1e-2}) {
            RunConfig c = grid_base;
            c.loss.lambda_do = l;
            push("lambda=" + fmt(l), c);
        }
    } else {
        throw ConfigError("unknown ablation suite: " + suite);
    }
    return rows;
}

}  // namespace

void run_ablation(const std::string& suite, const RunConfig& base, const std::string& data_dir,
                  const std::string& out_csv, const std::string& work_dir) {
    auto rows = build_suite(suite, base);
    CsvWriter csv(out_csv, kAblationColumns);
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto& entry = rows[i];
        const std::string run_dir =
            (fs::path(work_dir) / (suite + "_" + std::to_string(i))).string();
        TrainResult r = train(entry.cfg, data_dir, run_dir);
        const EvalResult& ev = r.final_eval;
        csv.row({suite, entry.variant, fmt(static_cast<int64_t>(entry.cfg.dist.K)),
                 fmt(static_cast<int64_t>(entry.cfg.model.N_s)), fmt(entry.cfg.loss.lambda_do),
                 entry.cfg.dist.strategy, entry.cfg.dist.basis, entry.cfg.loss.variant,
                 fmt(r.param_count), fmt(ev.map_full), fmt(ev.map_rare), fmt(ev.map_nonrare),
                 fmt(ev.map_unseen), fmt(ev.map_seen)});
    }
}

void sweep_pattern_dim(const std::vector<std::pair<int, int>>& entries, const RunConfig& base,
                       const std::string& data_dir, const std::string& out_csv,
                       const std::string& work_dir) {
    if (entries.empty())
        throw ConfigError("pattern sweep needs at least one (N_q, N_p) entry");
    const int64_t budget = static_cast<int64_t>(entries[0].first) * entries[0].second;
    for (const auto& [nq, np] : entries)
        if (static_cast<int64_t>(nq) * np != budget)
            throw ConfigError("pattern sweep entries must share N_q*N_p; got " +
                              std::to_string(nq) + "x" + std::to_string(np));

    CsvWriter csv(out_csv, kSweepColumns);
    int64_t expected_query_params = -1, expected_total = -1;
    for (size_t i = 0; i < entries.size(); ++i) {
        const auto& [nq, np] = entries[i];
        RunConfig cfg = base;
        cfg.pattern.enabled = true;
        cfg.pattern.N_p = np;
        cfg.model.N_q = nq;
        cfg.dist.use_prompts = false;

        const std::string run_dir = (fs::path(work_dir) / ("sweep_" + std::to_string(i))).string();
        TrainResult r = train(cfg, data_dir, run_dir);

        const int64_t query_params = 2LL * nq * np * cfg.model.C;  // two grids
        if (expected_query_params < 0) {
            expected_query_params = query_params;
            expected_total = r.param_count;
        }
        if (query_params != expected_query_params || r.param_count != expected_total)
            throw ConfigError("pattern sweep parameter budgets diverged at entry " +
                              std::to_string(i));

        const EvalResult& ev = r.final_eval;
        csv.row({fmt(static_cast<int64_t>(nq)), fmt(static_cast<int64_t>(np)),
                 fmt(static_cast<int64_t>(cfg.model.C)), fmt(query_params), fmt(r.param_count),
                 fmt(ev.map_full), fmt(ev.map_rare), fmt(ev.map_nonrare)});
    }
}

void export_dist(const RunConfig& cfg, const std::string& checkpoint, const std::string& data_dir,
                 const std::string& out_dir) {
    if (!cfg.dist.use_prompts || cfg.pattern.enabled)
        throw ConfigError("distribution export needs the prompt pipeline enabled");
    if (cfg.dist.K < 2)
        throw ConfigError("distribution export needs K >= 2");
    fs::create_directories(out_dir);

    Dataset test_ds = load_dataset(data_dir, "test.jsonl", cfg.model.grid);
    Pipeline pipe = Pipeline::build(cfg, test_ds.cats, test_ds.manifest.unseen_pairs);
    nc::load_checkpoint(*pipe.store, checkpoint);

    nc::NoGradGuard guard;
    CsvWriter variance((fs::path(out_dir) / "variance.csv").string(),
                       {"group", "category", "sigma_mean", "sigma_max", "param_count"});
    CsvWriter space((fs::path(out_dir) / "space.csv").string(),
                    {"group", "category", "mu_norm", "sigma_mean"});
    CsvWriter cosine_csv((fs::path(out_dir) / "cosine.csv").string(),
                         {"group", "category_i", "category_j", "cosine"});

    for (const auto* group : {&pipe.groups.subject, &pipe.groups.object, &pipe.groups.interaction}) {
        std::vector<numcore::Tensor> pooled;
        for (const auto& col : group->collections) {
            auto dist = distengine::estimate(col.block);
            double sig_sum = 0.0, sig_max = 0.0, mu_sq = 0.0;
            for (double v : dist.sigma.data()) {
                sig_sum += v;
                sig_max = std::max(sig_max, v);
            }
            for (double v : dist.mu.data())
                mu_sq += v * v;
            const double sig_mean = sig_sum / static_cast<double>(dist.sigma.numel());
            const char* gname = promptspace::group_name(col.group);
            variance.row({gname, col.label, fmt(sig_mean), fmt(sig_max),
                          fmt(pipe.store->param_count(col.param_name))});
            space.row({gname, col.label, fmt(std::sqrt(mu_sq)), fmt(sig_mean)});
            pooled.push_back(col.pooled_mean());
        }
        for (size_t i = 0; i < pooled.size(); ++i)
            for (size_t j = i + 1; j < pooled.size(); ++j) {
                const double c = ortho::cosine(pooled[i], pooled[j], cfg.loss.epsilon,
                                               cfg.dist.l1_norms)
                                     .item();
                cosine_csv.row({promptspace::group_name(group->kind),
                                group->collections[i].label, group->collections[j].label, fmt(c)});
            }
    }
}

}  // namespace harness
