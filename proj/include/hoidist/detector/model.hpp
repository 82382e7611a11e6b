#pragma once

#include <string>
#include <vector>

#include "hoidist/detector/matcher.hpp"
#include "hoidist/distengine.hpp"
#include "hoidist/numcore/ops.hpp"
#include "hoidist/numcore/param_store.hpp"

// Toy query-transformer HOI detector: visual encoder, instance decoder,
// interaction decoder (cascaded per query index), prediction heads, and the
// guidance-into-queries composition.
namespace detector {

using numcore::Tensor;

struct DetectorConfig {
    int C = 32;
    int encoder_layers = 2;
    int instance_decoder_layers = 2;
    int interaction_decoder_layers = 2;
    int heads = 4;
    int N_q = 16;
    int N_s = 2;
    int grid = 8;
    int ffn_mult = 2;

    int n_queries() const { return N_q * N_s; }
    void validate() const;
};

struct Linear {
    Tensor w;  // in x out
    Tensor b;  // out
};

Tensor apply(const Linear& l, const Tensor& x);

// Per-scene differentiable head outputs, one row per query.
struct DetectionBatch {
    Tensor subject_boxes;  // Q x 4, sigmoid space
    Tensor object_boxes;   // Q x 4
    Tensor obj_logits;     // Q x (n_obj + 1), background last
    Tensor hoi_logits;     // Q x n_pairs
};

// Numeric view for matching and evaluation.
QueryOutputs to_query_outputs(const DetectionBatch& det);

class Model {
  public:
    // `own_queries` = false skips the learnable query parameters (the
    // pattern-dimension experiment supplies its own).
    Model(numcore::ParamStore& store, const DetectorConfig& cfg, int feature_channels, int n_obj,
          int n_pairs, int guidance_dim, bool own_queries = true);

    const DetectorConfig& config() const { return cfg_; }

    Tensor query_ins() const;
    Tensor query_int() const;

    // Guidance composition: pooled subject+object guidance (each
    // N_q x N_s x e) concatenated, projected 2e->C and added to the instance
    // queries; interaction guidance projected e->C onto interaction queries.
    std::pair<Tensor, Tensor> compose_queries(const Tensor& q_ins, const Tensor& q_int,
                                              const distengine::GuidanceSample& sub,
                                              const distengine::GuidanceSample& obj,
                                              const distengine::GuidanceSample& inter) const;

    // features: (grid*grid) x feature_channels. Queries: (N_q*N_s) x C.
    // Throws NumericalError naming the layer if activations go non-finite.
    DetectionBatch forward(const Tensor& features, const Tensor& q_ins,
                           const Tensor& q_int) const;

  private:
    struct AttentionParams {
        Linear q, k, v, o;
    };
    struct LayerNormParams {
        Tensor g, b;
    };
    struct EncoderLayer {
        AttentionParams self_attn;
        Linear ffn1, ffn2;
        LayerNormParams ln1, ln2;
    };
    struct DecoderLayer {
        AttentionParams self_attn, cross_attn;
        Linear ffn1, ffn2;
        LayerNormParams ln1, ln2, ln3;
    };

    // Attention with additive positional conditioning: the projections of Q
    // and K see content + position, V sees content only.
    Tensor attend(const AttentionParams& p, const Tensor& q_content, const Tensor* q_pos,
                  const Tensor& k_content, const Tensor* k_pos) const;
    Tensor layer_norm(const LayerNormParams& p, const Tensor& x) const;
    Tensor encoder_layer(const EncoderLayer& l, const Tensor& x) const;
    Tensor decoder_layer(const DecoderLayer& l, const Tensor& content, const Tensor& query_pos,
                         const Tensor& memory) const;

    DetectorConfig cfg_;
    int n_obj_, n_pairs_, guidance_dim_;
    Linear input_proj_;
    Tensor pos_enc_;  // (grid*grid) x C constant
    std::vector<EncoderLayer> encoder_;
    std::vector<DecoderLayer> instance_decoder_;
    std::vector<DecoderLayer> interaction_decoder_;
    Linear tie_;                       // instance output -> interaction query space
    Linear guide_ins_, guide_int_;     // 2e -> C and e -> C
    Linear box_s1_, box_s2_, box_s3_;  // subject box MLP
    Linear box_o1_, box_o2_, box_o3_;  // object box MLP
    Linear obj_head_, hoi_head_;
    Tensor q_ins_, q_int_;
};

// Query grid for the pattern-dimension experiment: a learnable
// N_q x N_p x C parameter decoded as (N_q*N_p) x C queries, with the
// orthogonal loss applied across the N_q axis after pattern pooling.
struct QueryGrid {
    Tensor grid;
    int N_q = 0, N_p = 0, C = 0;

    Tensor queries() const;                         // (N_q*N_p) x C
    std::vector<Tensor> category_rows() const;      // N_q tensors of shape (C)
    int64_t param_count() const { return static_cast<int64_t>(N_q) * N_p * C; }
};

QueryGrid make_query_grid(numcore::ParamStore& store, const std::string& name, int N_q, int N_p,
                          int C);

}  // namespace detector
