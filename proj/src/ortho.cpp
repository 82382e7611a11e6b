#include "hoidist/ortho.hpp"

namespace ortho {

namespace nc = numcore;
using hoidist::ConfigError;

Variant parse_variant(const std::string& s) {
    if (s == "dynamic")
        return Variant::dynamic;
    if (s == "fixed_margin")
        return Variant::fixed_margin;
    if (s == "hard_contrastive")
        return Variant::hard_contrastive;
    throw ConfigError("unknown orthogonal loss variant: " + s);
}

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::dynamic: return "dynamic";
        case Variant::fixed_margin: return "fixed_margin";
        case Variant::hard_contrastive: return "hard_contrastive";
    }
    return "?";
}

ConstraintConfig build_constraint(numcore::ParamStore& store, double alpha_init, double epsilon,
                                  Variant variant, double lambda_do) {
    if (epsilon <= 0.0)
        throw ConfigError("constraint epsilon must be positive");
    if (lambda_do < 0.0)
        throw ConfigError("lambda_do must be nonnegative");
    ConstraintConfig c;
    c.alpha = store.create("ortho.alpha", Tensor::scalar(alpha_init));
    c.epsilon = epsilon;
    c.variant = variant;
    c.lambda_do = lambda_do;
    return c;
}

Tensor cosine(const Tensor& a, const Tensor& b, double epsilon, bool l1_norms) {
    Tensor dot = nc::sum(nc::mul(a, b));
    Tensor na = l1_norms ? nc::l1_norm(a) : nc::l2_norm(a);
    Tensor nb = l1_norms ? nc::l1_norm(b) : nc::l2_norm(b);
    return nc::div(nc::abs(dot), nc::add(nc::mul(na, nb), epsilon));
}

Tensor dynamic_margin(const Tensor& cos_ij, const Tensor& alpha) {
    return nc::mul(alpha, nc::add(nc::neg(cos_ij), 1.0));
}

Tensor loss_do(const std::vector<Tensor>& pooled_means, const ConstraintConfig& config) {
    const int n = static_cast<int>(pooled_means.size());
    if (n < 2)
        return Tensor::scalar(0.0);

    Tensor eps_floor = Tensor::scalar(config.epsilon);
    Tensor zero = Tensor::scalar(0.0);
    std::vector<Tensor> terms;
    terms.reserve(static_cast<size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            Tensor cos_ij = cosine(pooled_means[i], pooled_means[j], config.epsilon,
                                   config.l1_norms);
            Tensor hinge;
            switch (config.variant) {
                case Variant::dynamic:
                    hinge = nc::maximum(eps_floor,
                                        nc::sub(dynamic_margin(cos_ij, config.alpha), cos_ij));
                    break;
                case Variant::fixed_margin:
                    hinge = nc::maximum(eps_floor, nc::sub(config.alpha, cos_ij));
                    break;
                case Variant::hard_contrastive:
                    hinge = nc::maximum(zero, cos_ij);
                    break;
            }
            terms.push_back(nc::mul(hinge, hinge));
        }
    }
    Tensor total = terms[0];
    for (size_t k = 1; k < terms.size(); ++k)
        total = nc::add(total, terms[k]);
    return total;
}

}  // namespace ortho
