#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hoidist/harness/dataset.hpp"
#include "hoidist/harness/experiments.hpp"
#include "hoidist/harness/gradsuite.hpp"
#include "hoidist/harness/train.hpp"
#include "hoidist/synthworld.hpp"

namespace {

harness::RunConfig make_config(const std::string& config_path, int64_t seed_override) {
    harness::RunConfig cfg =
        config_path.empty() ? harness::RunConfig{} : harness::load_config(config_path);
    if (seed_override >= 0)
        cfg.train.seed = static_cast<uint64_t>(seed_override);
    cfg.validate();
    return cfg;
}

// "rf:K" = K rarest pairs first, "nf:K" = K most frequent first, otherwise a
// comma list of pair ids. Rarity follows the longtail rank (higher pair id =
// rarer).
std::set<int> parse_unseen(const std::string& spec, int n_pairs) {
    std::set<int> out;
    if (spec.empty())
        return out;
    auto take = [&](bool from_tail, int k) {
        for (int i = 0; i < std::min(k, n_pairs); ++i)
            out.insert(from_tail ? n_pairs - 1 - i : i);
    };
    if (spec.rfind("rf:", 0) == 0) {
        take(true, std::stoi(spec.substr(3)));
    } else if (spec.rfind("nf:", 0) == 0) {
        take(false, std::stoi(spec.substr(3)));
    } else {
        std::string token;
        std::istringstream ss(spec);
        while (std::getline(ss, token, ','))
            if (!token.empty())
                out.insert(std::stoi(token));
    }
    for (int p : out)
        if (p < 0 || p >= n_pairs)
            throw hoidist::ConfigError("unseen pair id out of range: " + std::to_string(p));
    return out;
}

std::vector<std::pair<int, int>> parse_grid(const std::string& spec) {
    std::vector<std::pair<int, int>> entries;
    std::string token;
    std::istringstream ss(spec);
    while (std::getline(ss, token, ',')) {
        const auto x = token.find('x');
        if (x == std::string::npos)
            throw hoidist::ConfigError("grid entry must look like 16x2: " + token);
        entries.emplace_back(std::stoi(token.substr(0, x)), std::stoi(token.substr(x + 1)));
    }
    return entries;
}

nlohmann::json eval_json(const harness::EvalResult& ev) {
    nlohmann::json j;
    j["map_full"] = ev.map_full;
    j["map_rare"] = ev.map_rare;
    j["map_nonrare"] = ev.map_nonrare;
    j["map_unseen"] = ev.map_unseen;
    j["map_seen"] = ev.map_seen;
    j["per_pair_ap"] = ev.per_pair_ap;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"prompt-distribution HOI laboratory"};
    app.require_subcommand(1);

    std::string config_path, data_dir, out_path, work_dir, checkpoint, suite, grid_spec,
        unseen_spec, profile = "longtail";
    int64_t seed = -1;
    int n_train = 2000, n_test = 400, rare_threshold = 10;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--seed", seed, "override train.seed");
    };

    auto* gen = app.add_subcommand("gen-data", "generate synthetic scenes");
    gen->add_option("--out", out_path, "output directory")->required();
    gen->add_option("--n-train", n_train, "training scenes");
    gen->add_option("--n-test", n_test, "test scenes");
    gen->add_option("--seed", seed, "generation seed");
    gen->add_option("--profile", profile, "train frequency profile: uniform|longtail");
    gen->add_option("--rare-threshold", rare_threshold, "rare split threshold");
    gen->add_option("--unseen", unseen_spec, "unseen pairs: rf:K, nf:K or id list");

    auto* tr = app.add_subcommand("train", "train a detector");
    tr->add_option("--data", data_dir, "dataset directory")->required();
    tr->add_option("--out", out_path, "run output directory")->required();
    add_common(tr);

    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
    ev->add_option("--data", data_dir, "dataset directory")->required();
    ev->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    ev->add_option("--out", out_path, "write the eval JSON here (default stdout)");
    add_common(ev);

    auto* gc = app.add_subcommand("gradcheck", "run the gradient suite");
    gc->add_option("--seed", seed, "suite seed");

    auto* ab = app.add_subcommand("ablate", "run an ablation suite");
    ab->add_option("--suite", suite, "components|loss_variants|sampling|basis|hyper")->required();
    ab->add_option("--data", data_dir, "dataset directory")->required();
    ab->add_option("--out", out_path, "output CSV")->required();
    ab->add_option("--work", work_dir, "scratch directory for runs");
    add_common(ab);

    auto* sw = app.add_subcommand("sweep-pattern-dim", "pattern-dimension sweep");
    sw->add_option("--grid", grid_spec, "entries like 16x1,8x2,4x4")->required();
    sw->add_option("--data", data_dir, "dataset directory")->required();
    sw->add_option("--out", out_path, "output CSV")->required();
    sw->add_option("--work", work_dir, "scratch directory for runs");
    add_common(sw);

    std::string export_format = "csv";
    auto* ex = app.add_subcommand("export-dist", "export learned distribution statistics");
    ex->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    ex->add_option("--data", data_dir, "dataset directory")->required();
    ex->add_option("--out", out_path, "output directory")->required();
    ex->add_option("--format", export_format, "output format (csv)");
    add_common(ex);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            auto cats = synthworld::default_categories();
            harness::GenDataOptions opt;
            opt.n_train = n_train;
            opt.n_test = n_test;
            opt.seed = seed >= 0 ? static_cast<uint64_t>(seed) : 42;
            opt.train_profile = synthworld::parse_profile(profile);
            opt.rare_threshold = rare_threshold;
            opt.unseen_pairs = parse_unseen(unseen_spec, cats.n_pairs());
            auto manifest = harness::gen_data(cats, opt, out_path);
            std::printf("wrote %d train / %d test scenes to %s (%zu rare, %zu unseen pairs)\n",
                        manifest.n_train, manifest.n_test, out_path.c_str(),
                        manifest.rare_pairs.size(), manifest.unseen_pairs.size());
        } else if (tr->parsed()) {
            auto cfg = make_config(config_path, seed);
            auto result = harness::train(cfg, data_dir, out_path);
            std::printf("trained %s: loss %.6f -> %.6f, mAP full %.4f\n", out_path.c_str(),
                        result.first_epoch_loss, result.final_epoch_loss,
                        result.final_eval.map_full);
        } else if (ev->parsed()) {
            auto cfg = make_config(config_path, seed);
            auto result = harness::evaluate_checkpoint(cfg, checkpoint, data_dir);
            const std::string text = eval_json(result).dump(2) + "\n";
            if (out_path.empty()) {
                std::fputs(text.c_str(), stdout);
            } else {
                std::ofstream f(out_path, std::ios::trunc);
                f << text;
            }
        } else if (gc->parsed()) {
            auto result = harness::run_grad_suite(seed >= 0 ? static_cast<uint64_t>(seed) : 42);
            for (const auto& c : result.checks)
                std::printf("%-34s max rel err %.3e  %s\n", c.name.c_str(), c.max_rel_err,
                            c.pass ? "PASS" : "FAIL");
            if (!result.pass) {
                std::fprintf(stderr, "gradient suite failed (tolerance %.0e)\n", result.tolerance);
                return 1;
            }
        } else if (ab->parsed()) {
            auto cfg = make_config(config_path, seed);
            if (work_dir.empty())
                work_dir = out_path + ".runs";
            harness::run_ablation(suite, cfg, data_dir, out_path, work_dir);
            std::printf("wrote %s\n", out_path.c_str());
        } else if (sw->parsed()) {
            auto cfg = make_config(config_path, seed);
            if (work_dir.empty())
                work_dir = out_path + ".runs";
            harness::sweep_pattern_dim(parse_grid(grid_spec), cfg, data_dir, out_path, work_dir);
            std::printf("wrote %s\n", out_path.c_str());
        } else if (ex->parsed()) {
            if (export_format != "csv")
                throw hoidist::ConfigError("unsupported export format: " + export_format);
            auto cfg = make_config(config_path, seed);
            harness::export_dist(cfg, checkpoint, data_dir, out_path);
            std::printf("wrote distribution exports to %s\n", out_path.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
