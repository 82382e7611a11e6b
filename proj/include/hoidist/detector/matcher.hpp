#pragma once

#include <vector>

#include "hoidist/boxes.hpp"

namespace detector {

struct CostWeights {
    double w_cls = 1.0;
    double w_obj = 1.0;
    double w_box = 2.5;
    double w_giou = 1.0;
};

// Ground truth of one scene in matcher/loss form.
struct SceneTargets {
    std::vector<hoidist::Box> subject_boxes;
    std::vector<hoidist::Box> object_boxes;
    std::vector<int> object_cls;
    std::vector<int> pair_id;
    size_t size() const { return pair_id.size(); }
};

// Numeric per-query predictions for matching and evaluation.
struct QueryOutputs {
    std::vector<hoidist::Box> subject_boxes;       // per query
    std::vector<hoidist::Box> object_boxes;        // per query
    std::vector<std::vector<double>> obj_probs;    // per query, softmax incl. background
    std::vector<std::vector<double>> hoi_scores;   // per query, sigmoid per pair
    size_t size() const { return subject_boxes.size(); }
};

// cost(gt, q) = w_cls*(1 - hoi score) + w_obj*(1 - object prob)
//             + w_box*(L1(b_s) + L1(b_o)) + w_giou*(2 - GIoU(b_s) - GIoU(b_o))
std::vector<std::vector<double>> match_cost_matrix(const QueryOutputs& pred,
                                                   const SceneTargets& gt,
                                                   const CostWeights& w);

// Minimum-cost one-to-one assignment of rows (ground truths) to columns
// (queries); rows must not outnumber columns. Returns the matched column per
// row. O(n^2 m) potentials + augmenting paths.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost);

double assignment_cost(const std::vector<std::vector<double>>& cost,
                       const std::vector<int>& assignment);

// Convenience: build the cost matrix and solve. Throws ConfigError when
// there are more ground truths than queries.
std::vector<int> hungarian_match(const QueryOutputs& pred, const SceneTargets& gt,
                                 const CostWeights& w);

}  // namespace detector
