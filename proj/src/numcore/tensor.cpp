#include "hoidist/numcore/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace numcore {

int64_t numel_of(const Shape& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
        if (d < 0)
            throw hoidist::ContractViolation("negative axis length in shape " + shape_str(shape));
        n *= d;
    }
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i)
        os << (i ? "," : "") << shape[i];
    os << "]";
    return os.str();
}

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
    return full(shape, 0.0, requires_grad);
}

Tensor Tensor::full(const Shape& shape, double value, bool requires_grad) {
    auto n = std::make_shared<Node>();
    n->shape = shape;
    n->value.assign(static_cast<size_t>(numel_of(shape)), value);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
}

Tensor Tensor::from_data(const Shape& shape, std::vector<double> data, bool requires_grad) {
    if (static_cast<int64_t>(data.size()) != numel_of(shape))
        throw hoidist::ContractViolation("data length " + std::to_string(data.size()) +
                                         " does not match shape " + shape_str(shape));
    auto n = std::make_shared<Node>();
    n->shape = shape;
    n->value = std::move(data);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_data({}, {value}, requires_grad);
}

const std::vector<double>& Tensor::grad() const {
    node_->ensure_grad();
    return node_->grad;
}

double Tensor::item() const {
    if (numel() != 1)
        throw hoidist::ContractViolation("item() on non-scalar tensor of shape " + shape_str(shape()));
    return node_->value[0];
}

double Tensor::at(std::initializer_list<int64_t> idx) const {
    const Shape& s = shape();
    if (idx.size() != s.size())
        throw hoidist::ContractViolation("index rank mismatch");
    int64_t off = 0;
    size_t d = 0;
    for (int64_t i : idx) {
        off = off * s[d] + i;
        ++d;
    }
    return node_->value[static_cast<size_t>(off)];
}

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() {
    return g_grad_enabled;
}

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) {
    g_grad_enabled = false;
}

NoGradGuard::~NoGradGuard() {
    g_grad_enabled = prev_;
}

void backward(const Tensor& loss) {
    if (!loss.defined() || loss.numel() != 1)
        throw hoidist::ContractViolation("backward() requires a scalar loss");

    // Iterative post-order DFS over grad-requiring ancestors.
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, size_t>> stack;
    if (loss.raw()->requires_grad) {
        stack.emplace_back(loss.raw(), 0);
        visited.insert(loss.raw());
    }
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* p = node->parents[next++].get();
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    loss.raw()->ensure_grad();
    loss.raw()->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward)
            n->backward(*n);
    }
}

Tensor grad_of(const Tensor& t) {
    t.raw()->ensure_grad();
    return Tensor::from_data(t.shape(), t.raw()->grad);
}

Tensor gaussian(Rng& rng, const Shape& shape, bool requires_grad) {
    auto n = std::make_shared<Node>();
    n->shape = shape;
    n->value.resize(static_cast<size_t>(numel_of(shape)));
    for (auto& v : n->value)
        v = rng.gaussian();
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
}

}  // namespace numcore
