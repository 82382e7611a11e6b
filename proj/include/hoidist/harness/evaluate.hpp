#pragma once

#include <cmath>
#include <set>
#include <vector>

#include "hoidist/categories.hpp"
#include "hoidist/detector/matcher.hpp"

namespace harness {

struct EvalResult {
    std::vector<double> per_pair_ap;  // NaN where the split has no ground truth
    double map_full = std::nan("");
    double map_rare = std::nan("");
    double map_nonrare = std::nan("");
    double map_unseen = std::nan("");
    double map_seen = std::nan("");
};

// Triplet-detection protocol: a detection of pair p is a true positive iff both its
// subject and object IoU against an unconsumed ground truth of p in the same
// scene exceed `iou_thresh`; candidates are visited by descending score and
// each ground truth is consumed once. AP is all-point interpolated. Per-pair
// candidate score is hoi_score[p] * obj_prob[object class of p].
//
// Split means recompute exactly from the per-pair APs; rare/unseen splits
// come from the manifest sets. Throws ConfigError on an empty test set.
EvalResult evaluate_map(const std::vector<detector::QueryOutputs>& detections,
                        const std::vector<detector::SceneTargets>& ground_truth,
                        const hoidist::CategorySet& cats, const std::vector<int>& rare_pairs,
                        const std::set<int>& unseen_pairs, double iou_thresh = 0.5);

}  // namespace harness
