#pragma once

#include <memory>
#include <optional>
#include <string>

#include "hoidist/harness/config.hpp"
#include "hoidist/harness/dataset.hpp"
#include "hoidist/harness/evaluate.hpp"

namespace harness {

// Everything one configuration needs at run time: parameter store, prompt
// groups and distribution spaces (or pattern-dimension query grids), the
// constraint, and the detector.
struct Pipeline {
    RunConfig cfg;
    hoidist::CategorySet cats;
    std::unique_ptr<numcore::ParamStore> store;
    std::unique_ptr<textenc::Vocab> vocab;
    promptspace::GroupSet groups;
    distengine::SpaceParams sub_space, obj_space, int_space;
    ortho::ConstraintConfig constraint;
    std::unique_ptr<detector::Model> model;
    detector::QueryGrid grid_ins, grid_int;
    bool has_prompts = false;
    bool has_constraint = false;

    static Pipeline build(const RunConfig& cfg, const hoidist::CategorySet& cats,
                          const std::set<int>& unseen_pairs);

    // Guidance for one prompt group under the configured basis/strategy.
    distengine::GuidanceSample group_guidance(const distengine::SpaceParams& params,
                                              const promptspace::PromptGroup& group,
                                              numcore::Rng& noise_rng) const;

    // Composed decoder queries; advances the noise stream.
    std::pair<numcore::Tensor, numcore::Tensor> make_queries(numcore::Rng& noise_rng) const;

    // Orthogonal loss over the constrained spaces (object + interaction
    // groups, or both query grids in pattern mode).
    numcore::Tensor ortho_loss() const;

    struct BatchStats {
        double loss_total = 0, loss_hoi = 0, loss_do = 0;
    };

    numcore::Tensor batch_loss(const Dataset& ds, const std::vector<int>& idx,
                               numcore::Rng& noise_rng, BatchStats* stats = nullptr) const;

    // Frozen-noise inference over a dataset (tape-free).
    std::vector<detector::QueryOutputs> infer_all(const Dataset& ds,
                                                  numcore::Rng eval_rng) const;

    double gamma_value(const distengine::SpaceParams& p) const;
    double alpha_value() const;
};

struct TrainResult {
    std::string checkpoint_file;
    std::string metrics_file;
    EvalResult final_eval;
    double first_epoch_loss = 0.0;
    double final_epoch_loss = 0.0;
    int64_t param_count = 0;
};

inline constexpr uint64_t kEvalNoiseTag = 0xea1;

// Full run: metrics.csv (per-epoch losses, gamma, alpha, eval mAP) and
// model.ckpt under out_dir. Deterministic given (config, dataset). A
// non-finite loss aborts with the last good state saved to abort.ckpt.
TrainResult train(const RunConfig& cfg, const std::string& data_dir, const std::string& out_dir);

// Evaluate a checkpoint on the test split with frozen eval noise.
EvalResult evaluate_checkpoint(const RunConfig& cfg, const std::string& checkpoint,
                               const std::string& data_dir);

}  // namespace harness
