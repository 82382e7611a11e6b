#include "hoidist/harness/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "hoidist/errors.hpp"

namespace harness {

using hoidist::ConfigError;
using nlohmann::json;

namespace {

void expect_keys(const json& j, const std::string& section, const std::set<std::string>& known) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("unknown config key " + section + "." + it.key());
}

template <class T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key))
        out = j.at(key).get<T>();
}

}  // namespace

void RunConfig::validate() const {
    model.validate();
    if (dist.K < 1 || dist.L < 3 || dist.e < 1)
        throw ConfigError("dist.{K,L,e} out of range");
    if (dist.use_distribution && dist.K < 2)
        throw ConfigError("distribution estimation needs dist.K >= 2");
    if (dist.n_placeholders + 2 > dist.L)
        throw ConfigError("dist.n_placeholders does not fit dist.L");
    if (loss.lambda_do < 0 || loss.epsilon <= 0)
        throw ConfigError("loss.{lambda_do,epsilon} out of range");
    if (train.epochs < 0 || train.batch_size < 1 || train.lr <= 0)
        throw ConfigError("train.{epochs,batch_size,lr} out of range");
    if (pattern.enabled && pattern.N_p < 1)
        throw ConfigError("pattern.N_p must be >= 1");
    ortho::parse_variant(loss.variant);
    distengine::parse_strategy(dist.strategy);
    distengine::parse_basis(dist.basis);
}

RunConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config JSON: ") + e.what());
    }
    expect_keys(j, "", {"model", "loss", "dist", "train", "pattern"});

    RunConfig c;
    if (j.contains("model")) {
        const auto& m = j["model"];
        expect_keys(m, "model",
                    {"C", "encoder_layers", "instance_decoder_layers", "interaction_decoder_layers",
                     "heads", "N_q", "N_s", "grid", "ffn_mult"});
        maybe(m, "C", c.model.C);
        maybe(m, "encoder_layers", c.model.encoder_layers);
        maybe(m, "instance_decoder_layers", c.model.instance_decoder_layers);
        maybe(m, "interaction_decoder_layers", c.model.interaction_decoder_layers);
        maybe(m, "heads", c.model.heads);
        maybe(m, "N_q", c.model.N_q);
        maybe(m, "N_s", c.model.N_s);
        maybe(m, "grid", c.model.grid);
        maybe(m, "ffn_mult", c.model.ffn_mult);
    }
    if (j.contains("loss")) {
        const auto& l = j["loss"];
        expect_keys(l, "loss",
                    {"lambda_do", "w_cls", "w_obj", "w_box", "w_giou", "w_bg", "epsilon", "variant"});
        maybe(l, "lambda_do", c.loss.lambda_do);
        maybe(l, "w_cls", c.loss.w_cls);
        maybe(l, "w_obj", c.loss.w_obj);
        maybe(l, "w_box", c.loss.w_box);
        maybe(l, "w_giou", c.loss.w_giou);
        maybe(l, "w_bg", c.loss.w_bg);
        maybe(l, "epsilon", c.loss.epsilon);
        maybe(l, "variant", c.loss.variant);
    }
    if (j.contains("dist")) {
        const auto& d = j["dist"];
        expect_keys(d, "dist",
                    {"K", "L", "e", "gamma_init", "alpha_init", "strategy", "basis",
                     "n_placeholders", "use_prompts", "use_distribution", "use_priors",
                     "hoi_design", "l1_norms"});
        maybe(d, "K", c.dist.K);
        maybe(d, "L", c.dist.L);
        maybe(d, "e", c.dist.e);
        maybe(d, "gamma_init", c.dist.gamma_init);
        maybe(d, "alpha_init", c.dist.alpha_init);
        maybe(d, "strategy", c.dist.strategy);
        maybe(d, "basis", c.dist.basis);
        maybe(d, "n_placeholders", c.dist.n_placeholders);
        maybe(d, "use_prompts", c.dist.use_prompts);
        maybe(d, "use_distribution", c.dist.use_distribution);
        maybe(d, "use_priors", c.dist.use_priors);
        maybe(d, "hoi_design", c.dist.hoi_design);
        maybe(d, "l1_norms", c.dist.l1_norms);
    }
    if (j.contains("train")) {
        const auto& t = j["train"];
        expect_keys(t, "train",
                    {"epochs", "lr", "seed", "batch_size", "decay_epoch", "lr_decay",
                     "weight_decay", "eval_every", "max_scenes"});
        maybe(t, "epochs", c.train.epochs);
        maybe(t, "lr", c.train.lr);
        maybe(t, "seed", c.train.seed);
        maybe(t, "batch_size", c.train.batch_size);
        maybe(t, "decay_epoch", c.train.decay_epoch);
        maybe(t, "lr_decay", c.train.lr_decay);
        maybe(t, "weight_decay", c.train.weight_decay);
        maybe(t, "eval_every", c.train.eval_every);
        maybe(t, "max_scenes", c.train.max_scenes);
    }
    if (j.contains("pattern")) {
        const auto& p = j["pattern"];
        expect_keys(p, "pattern", {"enabled", "N_p"});
        maybe(p, "enabled", c.pattern.enabled);
        maybe(p, "N_p", c.pattern.N_p);
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot open config: " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return config_from_json_text(text);
}

}  // namespace harness
