#pragma once

#include <string>

#include "hoidist/detector/losses.hpp"
#include "hoidist/detector/model.hpp"
#include "hoidist/distengine.hpp"
#include "hoidist/ortho.hpp"

namespace harness {

struct DistConfig {
    int K = 8;
    int L = 16;
    int e = 32;
    double gamma_init = 1e-2;
    double alpha_init = 0.5;
    std::string strategy = "reparam_gamma";
    std::string basis = "gaussian";
    int n_placeholders = 8;
    bool use_prompts = true;
    bool use_distribution = true;
    bool use_priors = true;
    bool hoi_design = true;
    bool l1_norms = false;
};

struct LossConfig {
    double lambda_do = 5e-2;
    double w_cls = 1.0;
    double w_obj = 1.0;
    double w_box = 2.5;
    double w_giou = 1.0;
    double w_bg = 0.1;
    double epsilon = 1e-8;
    std::string variant = "dynamic";

    detector::LossWeights weights() const { return {w_cls, w_obj, w_box, w_giou, w_bg}; }
};

struct TrainConfig {
    int epochs = 12;
    double lr = 1e-3;  // toy-scale default; full-scale setups go lower
    uint64_t seed = 42;
    int batch_size = 8;
    int decay_epoch = 8;   // lr multiplies by lr_decay from this epoch on
    double lr_decay = 0.1;
    double weight_decay = 1e-4;
    int eval_every = 1;    // 0 disables mid-training eval
    int max_scenes = 0;    // 0 = full training set
};

struct PatternConfig {
    bool enabled = false;
    int N_p = 1;
};

struct RunConfig {
    detector::DetectorConfig model;
    LossConfig loss;
    DistConfig dist;
    TrainConfig train;
    PatternConfig pattern;

    void validate() const;
};

// Partial overrides on top of defaults; unknown keys are rejected.
RunConfig load_config(const std::string& path);
RunConfig config_from_json_text(const std::string& text);

}  // namespace harness
