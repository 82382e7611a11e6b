#pragma once

#include <string>
#include <vector>

#include "hoidist/numcore/ops.hpp"
#include "hoidist/numcore/param_store.hpp"

// Dynamic orthogonal constraint over category pooled means: pairwise hinge
// max(eps, margin - cos)^2 with similarity-dependent margin alpha*(1 - cos).
namespace ortho {

using numcore::Tensor;

enum class Variant { dynamic, fixed_margin, hard_contrastive };

Variant parse_variant(const std::string& s);
const char* variant_name(Variant v);

struct ConstraintConfig {
    Tensor alpha;            // learnable scalar, init 0.5
    double epsilon = 1e-8;   // norm guard and hinge floor, same symbol
    Variant variant = Variant::dynamic;
    double lambda_do = 5e-2;
    bool l1_norms = false;   // denominator via L1 norms instead of Euclidean
};

ConstraintConfig build_constraint(numcore::ParamStore& store, double alpha_init = 0.5,
                                  double epsilon = 1e-8, Variant variant = Variant::dynamic,
                                  double lambda_do = 5e-2);

// |<flat(a), flat(b)>| / (||a|| * ||b|| + eps); nonnegative by construction.
Tensor cosine(const Tensor& a, const Tensor& b, double epsilon, bool l1_norms = false);

// alpha * (1 - cos); gradient flows through both alpha and cos.
Tensor dynamic_margin(const Tensor& cos_ij, const Tensor& alpha);

// Pairwise sum over i < j. Returns exact zero when fewer than two
// categories are given.
Tensor loss_do(const std::vector<Tensor>& pooled_means, const ConstraintConfig& config);

}  // namespace ortho
