#pragma once

#include <vector>

#include "hoidist/detector/model.hpp"
#include "hoidist/ortho.hpp"

namespace detector {

struct LossWeights {
    double w_cls = 1.0;   // hoi BCE
    double w_obj = 1.0;   // object cross entropy
    double w_box = 2.5;   // L1 on both boxes
    double w_giou = 1.0;  // GIoU on both boxes
    double w_bg = 0.1;    // background down-weight in the object CE

    CostWeights cost() const { return {w_cls, w_obj, w_box, w_giou}; }
};

// Differentiable GIoU of a predicted box (tensor of 4: cx cy w h) against a
// fixed ground-truth box.
Tensor giou_loss_term(const Tensor& pred_box, const hoidist::Box& gt);

// Set-prediction loss for one scene under a fixed assignment
// (gt index -> query index): weighted object CE with background targets for
// unmatched queries, per-pair BCE on the hoi logits, and L1 + GIoU on the
// matched boxes.
Tensor hoi_loss(const DetectionBatch& det, const SceneTargets& gt,
                const std::vector<int>& assignment, const LossWeights& w, int n_obj, int n_pairs);

}  // namespace detector
