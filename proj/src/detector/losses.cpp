#include "hoidist/detector/losses.hpp"

namespace detector {

namespace nc = numcore;
using hoidist::Box;

Tensor giou_loss_term(const Tensor& pred_box, const Box& gt) {
    Tensor cx = nc::slice(pred_box, 0, 0, 1);
    Tensor cy = nc::slice(pred_box, 0, 1, 1);
    Tensor w = nc::slice(pred_box, 0, 2, 1);
    Tensor h = nc::slice(pred_box, 0, 3, 1);
    Tensor hw = nc::mul(w, 0.5), hh = nc::mul(h, 0.5);
    Tensor x1 = nc::sub(cx, hw), x2 = nc::add(cx, hw);
    Tensor y1 = nc::sub(cy, hh), y2 = nc::add(cy, hh);

    auto c = [](double v) { return Tensor::scalar(v); };
    Tensor ix = nc::relu(nc::sub(nc::minimum(x2, c(gt.x2())), nc::maximum(x1, c(gt.x1()))));
    Tensor iy = nc::relu(nc::sub(nc::minimum(y2, c(gt.y2())), nc::maximum(y1, c(gt.y1()))));
    Tensor inter = nc::mul(nc::reshape(ix, {}), nc::reshape(iy, {}));

    Tensor area = nc::mul(nc::reshape(w, {}), nc::reshape(h, {}));
    Tensor uni = nc::sub(nc::add(area, gt.area()), inter);
    Tensor iou = nc::div(inter, nc::add(uni, 1e-9));

    Tensor ex = nc::sub(nc::maximum(x2, c(gt.x2())), nc::minimum(x1, c(gt.x1())));
    Tensor ey = nc::sub(nc::maximum(y2, c(gt.y2())), nc::minimum(y1, c(gt.y1())));
    Tensor enclose = nc::mul(nc::reshape(ex, {}), nc::reshape(ey, {}));
    Tensor giou = nc::sub(iou, nc::div(nc::sub(enclose, uni), nc::add(enclose, 1e-9)));
    return nc::add(nc::neg(giou), 1.0);  // 1 - GIoU
}

Tensor hoi_loss(const DetectionBatch& det, const SceneTargets& gt,
                const std::vector<int>& assignment, const LossWeights& w, int n_obj,
                int n_pairs) {
    const int64_t Q = det.obj_logits.shape()[0];
    const size_t n_gt = gt.size();

    // object CE with background for unmatched queries
    std::vector<int> obj_target(static_cast<size_t>(Q), n_obj);  // background class
    std::vector<int> matched_gt(static_cast<size_t>(Q), -1);
    for (size_t g = 0; g < n_gt; ++g) {
        obj_target[static_cast<size_t>(assignment[g])] = gt.object_cls[g];
        matched_gt[static_cast<size_t>(assignment[g])] = static_cast<int>(g);
    }
    Tensor weight_onehot = Tensor::zeros({Q, n_obj + 1});
    double weight_total = 0.0;
    for (int64_t q = 0; q < Q; ++q) {
        const double wq = matched_gt[static_cast<size_t>(q)] >= 0 ? 1.0 : w.w_bg;
        weight_onehot.mutable_data()[q * (n_obj + 1) + obj_target[static_cast<size_t>(q)]] = wq;
        weight_total += wq;
    }
    Tensor obj_ce = nc::mul(nc::neg(nc::sum(nc::mul(weight_onehot, nc::log_softmax(det.obj_logits)))),
                            1.0 / weight_total);

    // multi-label BCE on hoi logits; matched queries carry their pair.
    // Summed over classes, averaged over queries, so the per-query signal
    // does not shrink with the class count.
    Tensor hoi_target = Tensor::zeros({Q, n_pairs});
    for (size_t g = 0; g < n_gt; ++g)
        hoi_target.mutable_data()[static_cast<int64_t>(assignment[g]) * n_pairs + gt.pair_id[g]] = 1.0;
    Tensor hoi_bce = nc::mean(nc::sum(nc::bce_with_logits(det.hoi_logits, hoi_target), 1, false));

    Tensor total = nc::add(nc::mul(obj_ce, w.w_obj), nc::mul(hoi_bce, w.w_cls));

    if (n_gt > 0) {
        std::vector<Tensor> l1_terms, giou_terms;
        for (size_t g = 0; g < n_gt; ++g) {
            const int64_t q = assignment[g];
            Tensor ps = nc::reshape(nc::slice(det.subject_boxes, 0, q, 1), {4});
            Tensor po = nc::reshape(nc::slice(det.object_boxes, 0, q, 1), {4});
            const Box& bs = gt.subject_boxes[g];
            const Box& bo = gt.object_boxes[g];
            Tensor gts = Tensor::from_data({4}, {bs.cx, bs.cy, bs.w, bs.h});
            Tensor gto = Tensor::from_data({4}, {bo.cx, bo.cy, bo.w, bo.h});
            l1_terms.push_back(nc::add(nc::sum(nc::abs(nc::sub(ps, gts))),
                                       nc::sum(nc::abs(nc::sub(po, gto)))));
            giou_terms.push_back(nc::add(giou_loss_term(ps, bs), giou_loss_term(po, bo)));
        }
        Tensor l1 = l1_terms[0], gi = giou_terms[0];
        for (size_t k = 1; k < l1_terms.size(); ++k) {
            l1 = nc::add(l1, l1_terms[k]);
            gi = nc::add(gi, giou_terms[k]);
        }
        const double inv = 1.0 / static_cast<double>(n_gt);
        total = nc::add(total, nc::add(nc::mul(l1, w.w_box * inv), nc::mul(gi, w.w_giou * inv)));
    }
    return total;
}

}  // namespace detector
