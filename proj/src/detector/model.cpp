#include "hoidist/detector/model.hpp"

#include <cmath>

namespace detector {

namespace nc = numcore;
using hoidist::ConfigError;
using hoidist::NumericalError;
using nc::Rng;

void DetectorConfig::validate() const {
    if (C <= 0 || heads <= 0 || C % heads != 0)
        throw ConfigError("hidden dimension must be divisible by head count");
    if (N_q <= 0 || N_s <= 0 || grid <= 0 || ffn_mult <= 0)
        throw ConfigError("detector dimensions must be positive");
    if (encoder_layers < 0 || instance_decoder_layers < 0 || interaction_decoder_layers < 0)
        throw ConfigError("layer counts must be nonnegative");
}

Tensor apply(const Linear& l, const Tensor& x) {
    return nc::add(nc::matmul(x, l.w), l.b);
}

namespace {

Linear make_linear(nc::ParamStore& store, Rng& rng, const std::string& name, int in, int out) {
    Tensor w = Tensor::zeros({in, out});
    const double scale = std::sqrt(2.0 / (in + out));
    for (auto& v : w.mutable_data())
        v = rng.gaussian() * scale;
    Linear l;
    l.w = store.create(name + ".w", w);
    l.b = store.create(name + ".b", Tensor::zeros({out}));
    return l;
}

void check_finite(const Tensor& t, const char* label) {
    for (double v : t.data())
        if (!std::isfinite(v))
            throw NumericalError(std::string("non-finite activations in ") + label);
}

}  // namespace

QueryOutputs to_query_outputs(const DetectionBatch& det) {
    QueryOutputs out;
    const int64_t q_count = det.subject_boxes.shape()[0];
    Tensor probs = nc::softmax(det.obj_logits);
    Tensor scores = nc::sigmoid(det.hoi_logits);
    const int64_t n_obj1 = probs.shape()[1];
    const int64_t n_pairs = scores.shape()[1];
    for (int64_t q = 0; q < q_count; ++q) {
        const auto b = [&](const Tensor& t, int64_t i) { return t.data()[q * 4 + i]; };
        out.subject_boxes.push_back({b(det.subject_boxes, 0), b(det.subject_boxes, 1),
                                     b(det.subject_boxes, 2), b(det.subject_boxes, 3)});
        out.object_boxes.push_back({b(det.object_boxes, 0), b(det.object_boxes, 1),
                                    b(det.object_boxes, 2), b(det.object_boxes, 3)});
        out.obj_probs.emplace_back(probs.data().begin() + q * n_obj1,
                                   probs.data().begin() + (q + 1) * n_obj1);
        out.hoi_scores.emplace_back(scores.data().begin() + q * n_pairs,
                                    scores.data().begin() + (q + 1) * n_pairs);
    }
    return out;
}

Tensor Model::query_ins() const {
    if (!q_ins_.defined())
        throw ConfigError("model built without its own queries");
    return q_ins_;
}

Tensor Model::query_int() const {
    if (!q_int_.defined())
        throw ConfigError("model built without its own queries");
    return q_int_;
}

Model::Model(nc::ParamStore& store, const DetectorConfig& cfg, int feature_channels, int n_obj,
             int n_pairs, int guidance_dim, bool own_queries)
    : cfg_(cfg), n_obj_(n_obj), n_pairs_(n_pairs), guidance_dim_(guidance_dim) {
    cfg_.validate();
    Rng rng = Rng(store.rng_seed() ^ 0xde7ec70ull);
    const int C = cfg_.C;

    input_proj_ = make_linear(store, rng, "det.input_proj", feature_channels, C);

    // fixed 2-D sinusoidal position code over the feature grid
    {
        const int G = cfg_.grid;
        Tensor pe = Tensor::zeros({static_cast<int64_t>(G) * G, C});
        auto& d = pe.mutable_data();
        for (int gy = 0; gy < G; ++gy)
            for (int gx = 0; gx < G; ++gx) {
                const int64_t row = (static_cast<int64_t>(gy) * G + gx) * C;
                for (int c = 0; c < C / 2; ++c) {
                    const double freq = std::pow(100.0, -2.0 * (c / 2) / (C / 2.0));
                    const double pos = (c % 2 == 0) ? gx : gy;
                    d[row + c] = std::sin(pos * freq);
                    d[row + C / 2 + c] = std::cos(pos * freq);
                }
            }
        pos_enc_ = pe;
    }

    auto make_attention = [&](const std::string& prefix) {
        AttentionParams a;
        a.q = make_linear(store, rng, prefix + ".q", C, C);
        a.k = make_linear(store, rng, prefix + ".k", C, C);
        a.v = make_linear(store, rng, prefix + ".v", C, C);
        a.o = make_linear(store, rng, prefix + ".o", C, C);
        return a;
    };
    auto make_ln = [&](const std::string& prefix) {
        LayerNormParams ln;
        ln.g = store.create(prefix + ".g", Tensor::full({C}, 1.0));
        ln.b = store.create(prefix + ".b", Tensor::zeros({C}));
        return ln;
    };

    for (int i = 0; i < cfg_.encoder_layers; ++i) {
        const std::string p = "det.enc." + std::to_string(i);
        EncoderLayer l;
        l.self_attn = make_attention(p + ".attn");
        l.ffn1 = make_linear(store, rng, p + ".ffn1", C, C * cfg_.ffn_mult);
        l.ffn2 = make_linear(store, rng, p + ".ffn2", C * cfg_.ffn_mult, C);
        l.ln1 = make_ln(p + ".ln1");
        l.ln2 = make_ln(p + ".ln2");
        encoder_.push_back(std::move(l));
    }
    auto make_decoder = [&](const std::string& stem, int layers, std::vector<DecoderLayer>& out) {
        for (int i = 0; i < layers; ++i) {
            const std::string p = stem + std::to_string(i);
            DecoderLayer l;
            l.self_attn = make_attention(p + ".self");
            l.cross_attn = make_attention(p + ".cross");
            l.ffn1 = make_linear(store, rng, p + ".ffn1", C, C * cfg_.ffn_mult);
            l.ffn2 = make_linear(store, rng, p + ".ffn2", C * cfg_.ffn_mult, C);
            l.ln1 = make_ln(p + ".ln1");
            l.ln2 = make_ln(p + ".ln2");
            l.ln3 = make_ln(p + ".ln3");
            out.push_back(std::move(l));
        }
    };
    make_decoder("det.ins_dec.", cfg_.instance_decoder_layers, instance_decoder_);
    make_decoder("det.int_dec.", cfg_.interaction_decoder_layers, interaction_decoder_);

    tie_ = make_linear(store, rng, "det.tie", C, C);
    guide_ins_ = make_linear(store, rng, "det.guide_ins", 2 * guidance_dim, C);
    guide_int_ = make_linear(store, rng, "det.guide_int", guidance_dim, C);

    box_s1_ = make_linear(store, rng, "det.box_s.0", C, C);
    box_s2_ = make_linear(store, rng, "det.box_s.1", C, C);
    box_s3_ = make_linear(store, rng, "det.box_s.2", C, 4);
    box_o1_ = make_linear(store, rng, "det.box_o.0", C, C);
    box_o2_ = make_linear(store, rng, "det.box_o.1", C, C);
    box_o3_ = make_linear(store, rng, "det.box_o.2", C, 4);
    obj_head_ = make_linear(store, rng, "det.obj_head", C, n_obj + 1);
    hoi_head_ = make_linear(store, rng, "det.hoi_head", C, n_pairs);

    if (own_queries) {
        const int Q = cfg_.n_queries();
        Tensor qi = Tensor::zeros({Q, C});
        for (auto& v : qi.mutable_data())
            v = rng.gaussian() * 0.02;
        q_ins_ = store.create("det.query_ins", qi);
        Tensor qt = Tensor::zeros({Q, C});
        for (auto& v : qt.mutable_data())
            v = rng.gaussian() * 0.02;
        q_int_ = store.create("det.query_int", qt);
    }
}

std::pair<Tensor, Tensor> Model::compose_queries(const Tensor& q_ins, const Tensor& q_int,
                                                 const distengine::GuidanceSample& sub,
                                                 const distengine::GuidanceSample& obj,
                                                 const distengine::GuidanceSample& inter) const {
    const int Q = cfg_.n_queries();
    const int e = guidance_dim_;
    auto flat = [&](const Tensor& pooled) { return nc::reshape(pooled, {Q, e}); };

    Tensor ins_guide = nc::concat({flat(sub.pooled), flat(obj.pooled)}, 1);  // Q x 2e
    Tensor q_d_ins = nc::add(q_ins, apply(guide_ins_, ins_guide));
    Tensor q_d_int = nc::add(q_int, apply(guide_int_, flat(inter.pooled)));
    return {q_d_ins, q_d_int};
}

Tensor Model::attend(const AttentionParams& p, const Tensor& q_content, const Tensor* q_pos,
                     const Tensor& k_content, const Tensor* k_pos) const {
    const int C = cfg_.C;
    const int H = cfg_.heads;
    const int d = C / H;
    Tensor Q = apply(p.q, q_pos ? nc::add(q_content, *q_pos) : q_content);
    Tensor K = apply(p.k, k_pos ? nc::add(k_content, *k_pos) : k_content);
    Tensor V = apply(p.v, k_content);
    std::vector<Tensor> heads;
    heads.reserve(static_cast<size_t>(H));
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (int h = 0; h < H; ++h) {
        Tensor qh = nc::slice(Q, 1, static_cast<int64_t>(h) * d, d);
        Tensor kh = nc::slice(K, 1, static_cast<int64_t>(h) * d, d);
        Tensor vh = nc::slice(V, 1, static_cast<int64_t>(h) * d, d);
        Tensor att = nc::softmax(nc::mul(nc::matmul(qh, nc::transpose(kh)), scale));
        heads.push_back(nc::matmul(att, vh));
    }
    return apply(p.o, nc::concat(heads, 1));
}

Tensor Model::layer_norm(const LayerNormParams& p, const Tensor& x) const {
    Tensor mu = nc::mean(x, 1, true);
    Tensor centered = nc::sub(x, mu);
    Tensor var = nc::mean(nc::mul(centered, centered), 1, true);
    Tensor normed = nc::div(centered, nc::sqrt(nc::add(var, 1e-5)));
    return nc::add(nc::mul(normed, p.g), p.b);
}

Tensor Model::encoder_layer(const EncoderLayer& l, const Tensor& x) const {
    Tensor a = attend(l.self_attn, x, &pos_enc_, x, &pos_enc_);
    Tensor h = layer_norm(l.ln1, nc::add(x, a));
    Tensor f = apply(l.ffn2, nc::relu(apply(l.ffn1, h)));
    return layer_norm(l.ln2, nc::add(h, f));
}

Tensor Model::decoder_layer(const DecoderLayer& l, const Tensor& content, const Tensor& query_pos,
                            const Tensor& memory) const {
    Tensor a = attend(l.self_attn, content, &query_pos, content, &query_pos);
    Tensor h = layer_norm(l.ln1, nc::add(content, a));
    Tensor c = attend(l.cross_attn, h, &query_pos, memory, &pos_enc_);
    h = layer_norm(l.ln2, nc::add(h, c));
    Tensor f = apply(l.ffn2, nc::relu(apply(l.ffn1, h)));
    return layer_norm(l.ln3, nc::add(h, f));
}

DetectionBatch Model::forward(const Tensor& features, const Tensor& q_ins,
                              const Tensor& q_int) const {
    Tensor memory = apply(input_proj_, features);
    int li = 0;
    for (const auto& l : encoder_) {
        memory = encoder_layer(l, memory);
        check_finite(memory, ("encoder layer " + std::to_string(li++)).c_str());
    }

    // queries seed the content stream and anchor attention at every layer
    Tensor ins = q_ins;
    li = 0;
    for (const auto& l : instance_decoder_) {
        ins = decoder_layer(l, ins, q_ins, memory);
        check_finite(ins, ("instance decoder layer " + std::to_string(li++)).c_str());
    }

    // cascade: interaction queries conditioned on the tied instance output
    Tensor inter_pos = nc::add(q_int, apply(tie_, ins));
    Tensor inter = inter_pos;
    li = 0;
    for (const auto& l : interaction_decoder_) {
        inter = decoder_layer(l, inter, inter_pos, memory);
        check_finite(inter, ("interaction decoder layer " + std::to_string(li++)).c_str());
    }

    DetectionBatch det;
    Tensor hs = nc::relu(apply(box_s2_, nc::relu(apply(box_s1_, ins))));
    det.subject_boxes = nc::sigmoid(apply(box_s3_, hs));
    Tensor ho = nc::relu(apply(box_o2_, nc::relu(apply(box_o1_, ins))));
    det.object_boxes = nc::sigmoid(apply(box_o3_, ho));
    det.obj_logits = apply(obj_head_, ins);
    det.hoi_logits = apply(hoi_head_, inter);
    check_finite(det.obj_logits, "object head");
    check_finite(det.hoi_logits, "interaction head");
    return det;
}

Tensor QueryGrid::queries() const {
    return nc::reshape(grid, {static_cast<int64_t>(N_q) * N_p, C});
}

std::vector<Tensor> QueryGrid::category_rows() const {
    std::vector<Tensor> rows;
    rows.reserve(static_cast<size_t>(N_q));
    for (int i = 0; i < N_q; ++i) {
        Tensor r = nc::slice(grid, 0, i, 1);             // 1 x N_p x C
        rows.push_back(nc::reshape(nc::mean(nc::reshape(r, {N_p, C}), 0, false), {C}));
    }
    return rows;
}

QueryGrid make_query_grid(nc::ParamStore& store, const std::string& name, int N_q, int N_p,
                          int C) {
    if (N_q <= 0 || N_p <= 0 || C <= 0)
        throw ConfigError("query grid dimensions must be positive");
    QueryGrid g;
    g.N_q = N_q;
    g.N_p = N_p;
    g.C = C;
    Rng rng = Rng(store.rng_seed() ^ 0x9d6b1ull).substream(static_cast<uint64_t>(N_q * 1000003 + N_p));
    Tensor t = Tensor::zeros({N_q, N_p, C});
    for (auto& v : t.mutable_data())
        v = rng.gaussian() * 0.02;
    g.grid = store.create(name, t);
    return g;
}

}  // namespace detector
