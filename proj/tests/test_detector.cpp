#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hoidist/detector/losses.hpp"
#include "hoidist/detector/matcher.hpp"
#include "hoidist/detector/model.hpp"
#include "hoidist/numcore/gradcheck.hpp"

using namespace detector;
using hoidist::Box;
using numcore::ParamStore;
using numcore::Rng;
using numcore::Shape;
using numcore::Tensor;

namespace {

// exhaustive minimum over all injective row->column maps
double brute_force_min_cost(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const int m = static_cast<int>(cost[0].size());
    std::vector<int> cols(m);
    std::iota(cols.begin(), cols.end(), 0);
    double best = 1e300;
    std::vector<int> pick(n);
    std::function<void(int, int, double)> rec = [&](int row, int used_mask, double acc) {
        if (row == n) {
            best = std::min(best, acc);
            return;
        }
        for (int j = 0; j < m; ++j)
            if (!(used_mask & (1 << j)))
                rec(row + 1, used_mask | (1 << j), acc + cost[row][j]);
    };
    rec(0, 0, 0.0);
    return best;
}

QueryOutputs random_outputs(Rng& rng, int n_queries, int n_obj, int n_pairs) {
    QueryOutputs out;
    for (int q = 0; q < n_queries; ++q) {
        out.subject_boxes.push_back({rng.uniform(), rng.uniform(), 0.05 + 0.3 * rng.uniform(),
                                     0.05 + 0.3 * rng.uniform()});
        out.object_boxes.push_back({rng.uniform(), rng.uniform(), 0.05 + 0.3 * rng.uniform(),
                                    0.05 + 0.3 * rng.uniform()});
        std::vector<double> probs(static_cast<size_t>(n_obj) + 1);
        double total = 0.0;
        for (auto& p : probs)
            total += (p = rng.uniform() + 1e-3);
        for (auto& p : probs)
            p /= total;
        out.obj_probs.push_back(probs);
        std::vector<double> scores(static_cast<size_t>(n_pairs));
        for (auto& s : scores)
            s = rng.uniform();
        out.hoi_scores.push_back(scores);
    }
    return out;
}

SceneTargets random_targets(Rng& rng, int n, int n_obj, int n_pairs) {
    SceneTargets gt;
    for (int g = 0; g < n; ++g) {
        gt.subject_boxes.push_back({rng.uniform(), rng.uniform(), 0.1 + 0.2 * rng.uniform(),
                                    0.1 + 0.2 * rng.uniform()});
        gt.object_boxes.push_back({rng.uniform(), rng.uniform(), 0.1 + 0.2 * rng.uniform(),
                                   0.1 + 0.2 * rng.uniform()});
        gt.object_cls.push_back(static_cast<int>(rng.next_u64() % n_obj));
        gt.pair_id.push_back(static_cast<int>(rng.next_u64() % n_pairs));
    }
    return gt;
}

}  // namespace

TEST_CASE("hungarian equals exhaustive minimum on 1000 random instances") {
    Rng rng(42);
    for (int trial = 0; trial < 1000; ++trial) {
        const int m = 1 + static_cast<int>(rng.next_u64() % 6);  // queries <= 6
        const int n = 1 + static_cast<int>(rng.next_u64() % m);  // gts <= queries
        std::vector<std::vector<double>> cost(n, std::vector<double>(m));
        for (auto& row : cost)
            for (auto& v : row)
                v = rng.uniform() * 10.0;
        auto match = hungarian(cost);
        // validity: one-to-one
        std::vector<bool> used(m, false);
        for (int j : match) {
            CHECK(!used[j]);
            used[j] = true;
        }
        CHECK(assignment_cost(cost, match) == doctest::Approx(brute_force_min_cost(cost)).epsilon(1e-10));
    }
}

TEST_CASE("matching trivia: exact echo matches at near-zero cost; crossed boxes uncross") {
    SceneTargets gt;
    gt.subject_boxes = {{0.3, 0.3, 0.2, 0.2}};
    gt.object_boxes = {{0.6, 0.6, 0.1, 0.1}};
    gt.object_cls = {1};
    gt.pair_id = {2};
    QueryOutputs pred;
    pred.subject_boxes = gt.subject_boxes;
    pred.object_boxes = gt.object_boxes;
    pred.obj_probs = {{0.001, 0.997, 0.001, 0.001}};
    pred.hoi_scores = {{0.01, 0.01, 0.99, 0.01}};
    auto m = hungarian_match(pred, gt, CostWeights{});
    CHECK(m == std::vector<int>{0});
    CHECK(assignment_cost(match_cost_matrix(pred, gt, CostWeights{}), m) < 0.05);

    // two gts, two queries with crossed boxes: each gt takes its nearer query
    SceneTargets gt2;
    gt2.subject_boxes = {{0.2, 0.2, 0.2, 0.2}, {0.8, 0.8, 0.2, 0.2}};
    gt2.object_boxes = {{0.3, 0.2, 0.1, 0.1}, {0.7, 0.8, 0.1, 0.1}};
    gt2.object_cls = {0, 0};
    gt2.pair_id = {0, 0};
    QueryOutputs pred2;
    pred2.subject_boxes = {{0.78, 0.79, 0.2, 0.2}, {0.21, 0.2, 0.2, 0.2}};
    pred2.object_boxes = {{0.69, 0.79, 0.1, 0.1}, {0.3, 0.21, 0.1, 0.1}};
    pred2.obj_probs = {{0.5, 0.5}, {0.5, 0.5}};
    pred2.hoi_scores = {{0.5}, {0.5}};
    auto m2 = hungarian_match(pred2, gt2, CostWeights{});
    CHECK(m2 == std::vector<int>{1, 0});
}

TEST_CASE("more ground truths than queries is a configuration error") {
    Rng rng(7);
    auto pred = random_outputs(rng, 2, 3, 4);
    auto gt = random_targets(rng, 3, 3, 4);
    CHECK_THROWS_AS(hungarian_match(pred, gt, CostWeights{}), hoidist::ConfigError);
}

TEST_CASE("differentiable giou agrees with the numeric giou") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        Box a{0.2 + 0.6 * rng.uniform(), 0.2 + 0.6 * rng.uniform(), 0.05 + 0.4 * rng.uniform(),
              0.05 + 0.4 * rng.uniform()};
        Box b{0.2 + 0.6 * rng.uniform(), 0.2 + 0.6 * rng.uniform(), 0.05 + 0.4 * rng.uniform(),
              0.05 + 0.4 * rng.uniform()};
        Tensor pred = Tensor::from_data({4}, {a.cx, a.cy, a.w, a.h});
        // the differentiable form carries 1e-9 division guards
        const double loss = giou_loss_term(pred, b).item();
        CHECK(loss == doctest::Approx(1.0 - hoidist::giou(a, b)).epsilon(1e-6));
    }
}

TEST_CASE("giou loss gradcheck") {
    Rng rng(13);
    Tensor pred = Tensor::from_data({4}, {0.4, 0.5, 0.3, 0.25}, true);
    Box gt{0.55, 0.45, 0.2, 0.3};
    auto f = [&]() { return giou_loss_term(pred, gt); };
    auto report = numcore::gradcheck(f, {{"box", pred}}, 1e-5);
    CHECK(report.pass);
}

TEST_CASE("model forward emits one detection per query with boxes in [0,1]") {
    ParamStore store(42);
    DetectorConfig cfg;
    cfg.C = 16;
    cfg.heads = 4;
    cfg.encoder_layers = 1;
    cfg.instance_decoder_layers = 1;
    cfg.interaction_decoder_layers = 1;
    cfg.N_q = 4;
    cfg.N_s = 2;
    cfg.grid = 4;
    Model model(store, cfg, 11, 4, 12, 8);

    Rng rng(3);
    Tensor features = numcore::gaussian(rng, {16, 11});
    auto det = model.forward(features, model.query_ins(), model.query_int());
    CHECK(det.subject_boxes.shape() == Shape{8, 4});
    CHECK(det.object_boxes.shape() == Shape{8, 4});
    CHECK(det.obj_logits.shape() == Shape{8, 5});
    CHECK(det.hoi_logits.shape() == Shape{8, 12});
    for (double v : det.subject_boxes.data()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("zero features and zero queries make all detections identical") {
    ParamStore store(42);
    DetectorConfig cfg;
    cfg.C = 16;
    cfg.heads = 2;
    cfg.encoder_layers = 1;
    cfg.instance_decoder_layers = 1;
    cfg.interaction_decoder_layers = 1;
    cfg.N_q = 3;
    cfg.N_s = 2;
    cfg.grid = 4;
    Model model(store, cfg, 11, 4, 12, 8);

    // uniform features kill spatial structure except the fixed pos code;
    // identical queries must decode identically
    Tensor features = Tensor::zeros({16, 11});
    Tensor q0 = Tensor::zeros({6, 16});
    auto det = model.forward(features, q0, q0);
    for (int q = 1; q < 6; ++q)
        for (int c = 0; c < 4; ++c) {
            CHECK(det.subject_boxes.at({q, c}) ==
                  doctest::Approx(det.subject_boxes.at({0, c})).epsilon(1e-12));
            CHECK(det.object_boxes.at({q, c}) ==
                  doctest::Approx(det.object_boxes.at({0, c})).epsilon(1e-12));
        }
    for (int q = 1; q < 6; ++q)
        for (int c = 0; c < 12; ++c)
            CHECK(det.hoi_logits.at({q, c}) == doctest::Approx(det.hoi_logits.at({0, c})).epsilon(1e-12));
}

TEST_CASE("permuting query order permutes detections identically") {
    ParamStore store(9);
    DetectorConfig cfg;
    cfg.C = 16;
    cfg.heads = 2;
    cfg.encoder_layers = 1;
    cfg.instance_decoder_layers = 2;
    cfg.interaction_decoder_layers = 1;
    cfg.N_q = 3;
    cfg.N_s = 2;
    cfg.grid = 4;
    Model model(store, cfg, 11, 4, 12, 8);

    Rng rng(4);
    Tensor features = numcore::gaussian(rng, {16, 11});
    Tensor qi = numcore::gaussian(rng, {6, 16});
    Tensor qt = numcore::gaussian(rng, {6, 16});
    auto det = model.forward(features, qi, qt);

    const std::vector<int64_t> perm{3, 0, 5, 1, 4, 2};
    auto permute_rows = [&](const Tensor& t) {
        Tensor out = Tensor::zeros(t.shape());
        const int64_t cols = t.shape()[1];
        for (size_t r = 0; r < perm.size(); ++r)
            for (int64_t c = 0; c < cols; ++c)
                out.mutable_data()[static_cast<int64_t>(r) * cols + c] = t.data()[perm[r] * cols + c];
        return out;
    };
    auto det_p = model.forward(features, permute_rows(qi), permute_rows(qt));
    for (size_t r = 0; r < perm.size(); ++r) {
        for (int64_t c = 0; c < 4; ++c)
            CHECK(det_p.subject_boxes.at({static_cast<int64_t>(r), c}) ==
                  doctest::Approx(det.subject_boxes.at({perm[r], c})).epsilon(1e-11));
        for (int64_t c = 0; c < 12; ++c)
            CHECK(det_p.hoi_logits.at({static_cast<int64_t>(r), c}) ==
                  doctest::Approx(det.hoi_logits.at({perm[r], c})).epsilon(1e-11));
    }
}

TEST_CASE("compose_queries: zero guidance and zero projections leave queries unchanged") {
    ParamStore store(42);
    DetectorConfig cfg;
    cfg.C = 16;
    cfg.heads = 2;
    cfg.encoder_layers = 1;
    cfg.instance_decoder_layers = 1;
    cfg.interaction_decoder_layers = 1;
    cfg.N_q = 4;
    cfg.N_s = 2;
    cfg.grid = 4;
    const int e = 8;
    Model model(store, cfg, 11, 4, 12, e);

    distengine::GuidanceSample zero;
    zero.pooled = Tensor::zeros({4, 2, e});
    zero.raw = Tensor::zeros({4, 2, 1, e});
    auto [qd_ins, qd_int] = model.compose_queries(model.query_ins(), model.query_int(), zero, zero, zero);
    // zero guidance through a linear with zero bias contributes exactly the bias
    for (int64_t i = 0; i < qd_ins.numel(); ++i)
        CHECK(qd_ins.data()[i] == model.query_ins().data()[i]);
    for (int64_t i = 0; i < qd_int.numel(); ++i)
        CHECK(qd_int.data()[i] == model.query_int().data()[i]);
}

TEST_CASE("compose_queries matches an independent matrix-arithmetic oracle") {
    ParamStore store(5);
    DetectorConfig cfg;
    cfg.C = 8;
    cfg.heads = 2;
    cfg.encoder_layers = 1;
    cfg.instance_decoder_layers = 1;
    cfg.interaction_decoder_layers = 1;
    cfg.N_q = 3;
    cfg.N_s = 2;
    cfg.grid = 4;
    const int e = 4;
    Model model(store, cfg, 11, 4, 12, e);

    Rng rng(21);
    distengine::GuidanceSample sub, obj, inter;
    sub.pooled = numcore::gaussian(rng, {3, 2, e});
    obj.pooled = numcore::gaussian(rng, {3, 2, e});
    inter.pooled = numcore::gaussian(rng, {3, 2, e});
    auto [qd_ins, qd_int] = model.compose_queries(model.query_ins(), model.query_int(), sub, obj, inter);

    const Tensor w_ins = store.get("det.guide_ins.w");
    const Tensor b_ins = store.get("det.guide_ins.b");
    for (int q = 0; q < 6; ++q)
        for (int c = 0; c < 8; ++c) {
            double acc = b_ins.data()[c];
            for (int k = 0; k < 2 * e; ++k) {
                const double g = k < e ? sub.pooled.data()[q * e + (k)]
                                       : obj.pooled.data()[q * e + (k - e)];
                acc += g * w_ins.data()[k * 8 + c];
            }
            acc += model.query_ins().data()[q * 8 + c];
            CHECK(qd_ins.at({q, c}) == doctest::Approx(acc).epsilon(1e-12));
        }
}

TEST_CASE("hoi_loss: lambda-free floor for perfect predictions") {
    // one gt, one matched query with exact boxes and confident classes
    SceneTargets gt;
    gt.subject_boxes = {{0.3, 0.3, 0.2, 0.2}};
    gt.object_boxes = {{0.6, 0.6, 0.1, 0.1}};
    gt.object_cls = {1};
    gt.pair_id = {0};

    DetectionBatch det;
    det.subject_boxes = Tensor::from_data({1, 4}, {0.3, 0.3, 0.2, 0.2});
    det.object_boxes = Tensor::from_data({1, 4}, {0.6, 0.6, 0.1, 0.1});
    det.obj_logits = Tensor::from_data({1, 3}, {-20.0, 20.0, -20.0});
    det.hoi_logits = Tensor::from_data({1, 2}, {20.0, -20.0});
    const double loss = hoi_loss(det, gt, {0}, LossWeights{}, 2, 2).item();
    CHECK(loss < 1e-6);  // box losses exactly zero, classification near floor
}

TEST_CASE("hoi_loss gradcheck through boxes and logits") {
    Rng rng(31);
    const int Q = 3, n_obj = 2, n_pairs = 3;
    DetectionBatch det;
    det.subject_boxes = Tensor::zeros({Q, 4}, true);
    det.object_boxes = Tensor::zeros({Q, 4}, true);
    det.obj_logits = Tensor::zeros({Q, n_obj + 1}, true);
    det.hoi_logits = Tensor::zeros({Q, n_pairs}, true);
    for (auto* t : {&det.subject_boxes, &det.object_boxes})
        for (auto& v : t->mutable_data())
            v = 0.2 + 0.6 * rng.uniform();
    for (auto* t : {&det.obj_logits, &det.hoi_logits})
        for (auto& v : t->mutable_data())
            v = rng.gaussian();

    auto gt = random_targets(rng, 2, n_obj, n_pairs);
    const std::vector<int> assignment{2, 0};
    auto f = [&]() { return hoi_loss(det, gt, assignment, LossWeights{}, n_obj, n_pairs); };
    auto report = numcore::gradcheck(f,
                                     {{"bs", det.subject_boxes},
                                      {"bo", det.object_boxes},
                                      {"obj", det.obj_logits},
                                      {"hoi", det.hoi_logits}},
                                     1e-5);
    CHECK(report.pass);
}

TEST_CASE("query grid: parameter counts and reshape") {
    ParamStore s1(42), s2(42);
    auto g32x2 = make_query_grid(s1, "pat.q", 32, 2, 64);
    auto g64x1 = make_query_grid(s2, "pat.q", 64, 1, 64);
    CHECK(g32x2.param_count() == 4096);
    CHECK(g64x1.param_count() == g32x2.param_count());
    CHECK(g32x2.queries().shape() == Shape{64, 64});

    // N_p = 1: reshape is the identity on values
    ParamStore s3(42);
    auto flat = make_query_grid(s3, "pat.q", 8, 1, 4);
    CHECK(flat.queries().data() == flat.grid.data());

    // orthogonal-loss pair count depends on N_q only
    CHECK(g32x2.category_rows().size() == 32);
    ParamStore s4(42);
    auto g32x4 = make_query_grid(s4, "pat.q", 32, 4, 16);
    CHECK(g32x4.category_rows().size() == 32);
}

TEST_CASE("category rows pool over the pattern axis") {
    ParamStore store(1);
    auto grid = make_query_grid(store, "pat.q", 3, 2, 4);
    auto rows = grid.category_rows();
    for (int i = 0; i < 3; ++i)
        for (int c = 0; c < 4; ++c) {
            const double expect = 0.5 * (grid.grid.at({i, 0, c}) + grid.grid.at({i, 1, c}));
            CHECK(rows[i].data()[c] == doctest::Approx(expect).epsilon(1e-12));
        }
}
