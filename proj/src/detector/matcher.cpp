#include "hoidist/detector/matcher.hpp"

#include <cmath>
#include <limits>

#include "hoidist/errors.hpp"

namespace detector {

using hoidist::Box;

namespace {

double box_l1(const Box& a, const Box& b) {
    return std::fabs(a.cx - b.cx) + std::fabs(a.cy - b.cy) + std::fabs(a.w - b.w) +
           std::fabs(a.h - b.h);
}

}  // namespace

std::vector<std::vector<double>> match_cost_matrix(const QueryOutputs& pred,
                                                   const SceneTargets& gt,
                                                   const CostWeights& w) {
    std::vector<std::vector<double>> cost(gt.size(), std::vector<double>(pred.size(), 0.0));
    for (size_t g = 0; g < gt.size(); ++g) {
        for (size_t q = 0; q < pred.size(); ++q) {
            double c = 0.0;
            c += w.w_cls * (1.0 - pred.hoi_scores[q][static_cast<size_t>(gt.pair_id[g])]);
            c += w.w_obj * (1.0 - pred.obj_probs[q][static_cast<size_t>(gt.object_cls[g])]);
            c += w.w_box * (box_l1(pred.subject_boxes[q], gt.subject_boxes[g]) +
                            box_l1(pred.object_boxes[q], gt.object_boxes[g]));
            c += w.w_giou * (2.0 - hoidist::giou(pred.subject_boxes[q], gt.subject_boxes[g]) -
                             hoidist::giou(pred.object_boxes[q], gt.object_boxes[g]));
            cost[g][q] = c;
        }
    }
    return cost;
}

std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    if (n == 0)
        return {};
    const int m = static_cast<int>(cost[0].size());
    if (n > m)
        throw hoidist::ConfigError("assignment needs at least as many columns as rows (" +
                                   std::to_string(n) + " > " + std::to_string(m) + ")");
    for (const auto& row : cost)
        for (double v : row)
            if (!std::isfinite(v))
                throw hoidist::NumericalError("non-finite entry in the assignment cost matrix");
    const double kInf = std::numeric_limits<double>::infinity();

    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= m; ++j) {
                if (used[j])
                    continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> match(n, -1);
    for (int j = 1; j <= m; ++j)
        if (p[j] != 0)
            match[p[j] - 1] = j - 1;
    return match;
}

double assignment_cost(const std::vector<std::vector<double>>& cost,
                       const std::vector<int>& assignment) {
    double total = 0.0;
    for (size_t g = 0; g < assignment.size(); ++g)
        total += cost[g][static_cast<size_t>(assignment[g])];
    return total;
}

std::vector<int> hungarian_match(const QueryOutputs& pred, const SceneTargets& gt,
                                 const CostWeights& w) {
    if (gt.size() > pred.size())
        throw hoidist::ConfigError("more ground-truth triplets than queries");
    return hungarian(match_cost_matrix(pred, gt, w));
}

}  // namespace detector
