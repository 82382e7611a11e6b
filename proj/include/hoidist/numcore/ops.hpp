#pragma once

#include <vector>

#include "hoidist/numcore/tensor.hpp"

// Differentiable primitives. Binary elementwise ops broadcast with NumPy
// trailing-axis rules; reductions act on one axis or the whole tensor.
namespace numcore {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor maximum(const Tensor& a, const Tensor& b);
Tensor minimum(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, double c);
Tensor mul(const Tensor& a, double c);

Tensor neg(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor abs(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);

Tensor matmul(const Tensor& a, const Tensor& b);  // 2-D only
Tensor transpose(const Tensor& a);                // 2-D only

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor max(const Tensor& a);
Tensor sum(const Tensor& a, int axis, bool keepdims);
Tensor mean(const Tensor& a, int axis, bool keepdims);
Tensor max(const Tensor& a, int axis, bool keepdims);

Tensor softmax(const Tensor& a);      // last axis
Tensor log_softmax(const Tensor& a);  // last axis

Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor reshape(const Tensor& a, const Shape& shape);  // one axis may be -1
Tensor slice(const Tensor& a, int axis, int64_t start, int64_t len);

// Identity forward; gradient zeroed where mask == 0. Mask is per element.
Tensor mask_grad(const Tensor& a, const std::vector<uint8_t>& learnable);

// Same values, no tape history.
Tensor detach(const Tensor& a);

// Composed helpers.
Tensor l2_norm(const Tensor& a);                          // sqrt(sum(a*a)), scalar
Tensor l1_norm(const Tensor& a);                          // sum(|a|), scalar
Tensor bce_with_logits(const Tensor& logits, const Tensor& targets);  // elementwise, stable

}  // namespace numcore
