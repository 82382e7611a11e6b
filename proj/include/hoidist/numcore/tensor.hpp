#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hoidist/errors.hpp"
#include "hoidist/numcore/rng.hpp"

namespace numcore {

using Shape = std::vector<int64_t>;

int64_t numel_of(const Shape& shape);
std::string shape_str(const Shape& shape);

struct Node;
using NodePtr = std::shared_ptr<Node>;

// One vertex of the reverse-mode tape. `backward` scatters the accumulated
// output gradient into the parents' grad buffers; it must not capture its
// own NodePtr (the self reference is passed in).
struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
    std::vector<NodePtr> parents;
    std::function<void(Node&)> backward;

    int64_t numel() const { return static_cast<int64_t>(value.size()); }
    void ensure_grad() {
        if (grad.size() != value.size())
            grad.assign(value.size(), 0.0);
    }
};

// Value-semantic handle onto a tape node. Data is float64, row-major.
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(NodePtr n) : node_(std::move(n)) {}

    static Tensor zeros(const Shape& shape, bool requires_grad = false);
    static Tensor full(const Shape& shape, double value, bool requires_grad = false);
    static Tensor from_data(const Shape& shape, std::vector<double> data, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    int64_t numel() const { return node_->numel(); }
    bool requires_grad() const { return node_->requires_grad; }

    const std::vector<double>& data() const { return node_->value; }
    std::vector<double>& mutable_data() { return node_->value; }
    const std::vector<double>& grad() const;

    // Scalar extraction; contract-checked.
    double item() const;
    double at(std::initializer_list<int64_t> idx) const;

    NodePtr node() const { return node_; }
    Node* raw() const { return node_.get(); }

  private:
    NodePtr node_;
};

// Seeds d(loss)/d(loss)=1 and walks the tape in reverse topological order.
// Throws ContractViolation if `loss` is not scalar.
void backward(const Tensor& loss);

// While a guard is alive, ops produce value-only nodes (no tape). Used on
// inference paths.
bool grad_enabled();
class NoGradGuard {
  public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

  private:
    bool prev_;
};

// Gradient of a leaf as a plain tensor (zeros if none was accumulated).
Tensor grad_of(const Tensor& t);

// I.i.d. standard normal samples; advances `rng` deterministically.
Tensor gaussian(Rng& rng, const Shape& shape, bool requires_grad = false);

}  // namespace numcore
