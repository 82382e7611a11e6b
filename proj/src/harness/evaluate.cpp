#include "hoidist/harness/evaluate.hpp"

#include <algorithm>

#include "hoidist/errors.hpp"

namespace harness {

using detector::QueryOutputs;
using detector::SceneTargets;
using hoidist::Box;

namespace {

struct Candidate {
    int scene = 0;
    int query = 0;
    double score = 0.0;
    Box b_s, b_o;
};

double average_precision(std::vector<Candidate>& cands,
                         const std::vector<const SceneTargets*>& gts, int pair_id, int npos,
                         double iou_thresh) {
    if (npos == 0)
        return std::nan("");
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score)
            return a.score > b.score;
        if (a.scene != b.scene)
            return a.scene < b.scene;
        return a.query < b.query;
    });

    // per-scene consumed flags for this pair's ground truths
    std::vector<std::vector<bool>> consumed(gts.size());
    for (size_t s = 0; s < gts.size(); ++s)
        consumed[s].assign(gts[s]->size(), false);

    const size_t n = cands.size();
    std::vector<uint8_t> is_tp(n, 0);
    for (size_t k = 0; k < n; ++k) {
        const Candidate& c = cands[k];
        const SceneTargets& gt = *gts[static_cast<size_t>(c.scene)];
        double best = iou_thresh;
        int best_g = -1;
        for (size_t g = 0; g < gt.size(); ++g) {
            if (gt.pair_id[g] != pair_id || consumed[static_cast<size_t>(c.scene)][g])
                continue;
            const double is = hoidist::iou(c.b_s, gt.subject_boxes[g]);
            const double io = hoidist::iou(c.b_o, gt.object_boxes[g]);
            const double m = std::min(is, io);
            if (m > best) {
                best = m;
                best_g = static_cast<int>(g);
            }
        }
        if (best_g >= 0) {
            consumed[static_cast<size_t>(c.scene)][static_cast<size_t>(best_g)] = true;
            is_tp[k] = 1;
        }
    }

    // all-point interpolation: backward cumulative max of precision
    std::vector<double> precision(n), recall(n);
    int tp = 0;
    for (size_t k = 0; k < n; ++k) {
        tp += is_tp[k];
        precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
        recall[k] = static_cast<double>(tp) / npos;
    }
    for (size_t k = n; k-- > 1;)
        precision[k - 1] = std::max(precision[k - 1], precision[k]);
    double ap = 0.0;
    double prev_recall = 0.0;
    for (size_t k = 0; k < n; ++k) {
        ap += (recall[k] - prev_recall) * precision[k];
        prev_recall = recall[k];
    }
    return ap;
}

double mean_over(const std::vector<double>& ap, const std::vector<int>& pairs) {
    double acc = 0.0;
    int n = 0;
    for (int p : pairs) {
        if (std::isnan(ap[static_cast<size_t>(p)]))
            continue;
        acc += ap[static_cast<size_t>(p)];
        ++n;
    }
    return n > 0 ? acc / n : std::nan("");
}

}  // namespace

EvalResult evaluate_map(const std::vector<QueryOutputs>& detections,
                        const std::vector<SceneTargets>& ground_truth,
                        const hoidist::CategorySet& cats, const std::vector<int>& rare_pairs,
                        const std::set<int>& unseen_pairs, double iou_thresh) {
    if (detections.empty() || detections.size() != ground_truth.size())
        throw hoidist::ConfigError("evaluate_map needs a nonempty, aligned test set");

    const int n_pairs = cats.n_pairs();
    std::vector<const SceneTargets*> gts;
    gts.reserve(ground_truth.size());
    for (const auto& g : ground_truth)
        gts.push_back(&g);

    EvalResult result;
    result.per_pair_ap.assign(static_cast<size_t>(n_pairs), std::nan(""));
    for (int p = 0; p < n_pairs; ++p) {
        const int obj_cls = cats.hoi_pairs[static_cast<size_t>(p)].second;
        std::vector<Candidate> cands;
        int npos = 0;
        for (size_t s = 0; s < detections.size(); ++s) {
            const QueryOutputs& det = detections[s];
            for (size_t q = 0; q < det.size(); ++q) {
                Candidate c;
                c.scene = static_cast<int>(s);
                c.query = static_cast<int>(q);
                c.score = det.hoi_scores[q][static_cast<size_t>(p)] *
                          det.obj_probs[q][static_cast<size_t>(obj_cls)];
                c.b_s = det.subject_boxes[q];
                c.b_o = det.object_boxes[q];
                cands.push_back(c);
            }
            for (size_t g = 0; g < ground_truth[s].size(); ++g)
                npos += (ground_truth[s].pair_id[g] == p);
        }
        result.per_pair_ap[static_cast<size_t>(p)] =
            average_precision(cands, gts, p, npos, iou_thresh);
    }

    std::vector<int> all, rare, nonrare, unseen, seen;
    const std::set<int> rare_set(rare_pairs.begin(), rare_pairs.end());
    for (int p = 0; p < n_pairs; ++p) {
        all.push_back(p);
        (rare_set.count(p) ? rare : nonrare).push_back(p);
        (unseen_pairs.count(p) ? unseen : seen).push_back(p);
    }
    result.map_full = mean_over(result.per_pair_ap, all);
    result.map_rare = mean_over(result.per_pair_ap, rare);
    result.map_nonrare = mean_over(result.per_pair_ap, nonrare);
    result.map_unseen = unseen.empty() ? std::nan("") : mean_over(result.per_pair_ap, unseen);
    result.map_seen = mean_over(result.per_pair_ap, seen);
    return result;
}

}  // namespace harness
