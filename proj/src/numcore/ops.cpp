#include "hoidist/numcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>

namespace numcore {

namespace {

using hoidist::ContractViolation;

Tensor make_result(Shape shape, std::vector<double> value, std::vector<NodePtr> parents,
                   std::function<void(Node&)> bwd) {
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value = std::move(value);
    bool rg = false;
    if (grad_enabled())
        for (const auto& p : parents)
            rg = rg || p->requires_grad;
    n->requires_grad = rg;
    if (rg) {
        n->parents = std::move(parents);
        n->backward = std::move(bwd);
    }
    return Tensor(std::move(n));
}

// Broadcast plan: per output axis, the stride of each operand (0 on
// broadcast axes). Shapes align from the trailing axis.
struct Bcast {
    Shape out;
    std::vector<int64_t> dims;
    std::vector<int64_t> sa, sb;
    int64_t n = 0;
};

Bcast make_bcast(const Shape& a, const Shape& b) {
    Bcast bc;
    const size_t rank = std::max(a.size(), b.size());
    bc.dims.resize(rank);
    bc.sa.resize(rank);
    bc.sb.resize(rank);
    std::vector<int64_t> da(rank, 1), db(rank, 1);
    for (size_t i = 0; i < a.size(); ++i)
        da[rank - a.size() + i] = a[i];
    for (size_t i = 0; i < b.size(); ++i)
        db[rank - b.size() + i] = b[i];
    for (size_t i = 0; i < rank; ++i) {
        if (da[i] != db[i] && da[i] != 1 && db[i] != 1)
            throw ContractViolation("broadcast mismatch: " + shape_str(a) + " vs " + shape_str(b));
        bc.dims[i] = std::max(da[i], db[i]);
    }
    int64_t stra = 1, strb = 1;
    for (size_t i = rank; i-- > 0;) {
        bc.sa[i] = (da[i] == 1) ? 0 : stra;
        bc.sb[i] = (db[i] == 1) ? 0 : strb;
        stra *= da[i];
        strb *= db[i];
    }
    bc.out = bc.dims;
    bc.n = 1;
    for (int64_t d : bc.dims)
        bc.n *= d;
    return bc;
}

// Walks output indices in row-major order, yielding operand offsets.
template <class F>
void bcast_walk(const Bcast& bc, F&& f) {
    const size_t rank = bc.dims.size();
    if (rank == 0) {
        f(0, 0, 0);
        return;
    }
    std::vector<int64_t> idx(rank, 0);
    int64_t oa = 0, ob = 0;
    for (int64_t out = 0; out < bc.n; ++out) {
        f(out, oa, ob);
        for (size_t i = rank; i-- > 0;) {
            ++idx[i];
            oa += bc.sa[i];
            ob += bc.sb[i];
            if (idx[i] < bc.dims[i])
                break;
            oa -= bc.sa[i] * bc.dims[i];
            ob -= bc.sb[i] * bc.dims[i];
            idx[i] = 0;
        }
    }
}

template <class Fwd, class Bwd>
Tensor binary_op(const Tensor& a, const Tensor& b, Fwd&& fwd, Bwd&& bwd_each) {
    const auto& av = a.data();
    const auto& bv = b.data();
    if (a.shape() == b.shape()) {
        std::vector<double> out(av.size());
        for (size_t i = 0; i < av.size(); ++i)
            out[i] = fwd(av[i], bv[i]);
        NodePtr pa = a.node(), pb = b.node();
        return make_result(a.shape(), std::move(out), {pa, pb}, [pa, pb, bwd_each](Node& self) {
            const bool ga = pa->requires_grad, gb = pb->requires_grad;
            if (ga)
                pa->ensure_grad();
            if (gb)
                pb->ensure_grad();
            for (size_t i = 0; i < self.value.size(); ++i) {
                double da = 0, db = 0;
                bwd_each(pa->value[i], pb->value[i], self.grad[i], da, db);
                if (ga)
                    pa->grad[i] += da;
                if (gb)
                    pb->grad[i] += db;
            }
        });
    }
    Bcast bc = make_bcast(a.shape(), b.shape());
    std::vector<double> out(static_cast<size_t>(bc.n));
    bcast_walk(bc, [&](int64_t o, int64_t oa, int64_t ob) { out[o] = fwd(av[oa], bv[ob]); });
    NodePtr pa = a.node(), pb = b.node();
    return make_result(bc.out, std::move(out), {pa, pb}, [pa, pb, bc, bwd_each](Node& self) {
        const bool ga = pa->requires_grad, gb = pb->requires_grad;
        if (ga)
            pa->ensure_grad();
        if (gb)
            pb->ensure_grad();
        bcast_walk(bc, [&](int64_t o, int64_t oa, int64_t ob) {
            double da = 0, db = 0;
            bwd_each(pa->value[oa], pb->value[ob], self.grad[o], da, db);
            if (ga)
                pa->grad[oa] += da;
            if (gb)
                pb->grad[ob] += db;
        });
    });
}

template <class Fwd, class Bwd>
Tensor unary_op(const Tensor& a, Fwd&& fwd, Bwd&& bwd_each) {
    const auto& av = a.data();
    std::vector<double> out(av.size());
    for (size_t i = 0; i < av.size(); ++i)
        out[i] = fwd(av[i]);
    NodePtr pa = a.node();
    return make_result(a.shape(), std::move(out), {pa}, [pa, bwd_each](Node& self) {
        pa->ensure_grad();
        for (size_t i = 0; i < self.value.size(); ++i)
            pa->grad[i] += bwd_each(pa->value[i], self.value[i], self.grad[i]);
    });
}

struct AxisSplit {
    int64_t outer, n, inner;
    Shape out_shape;
};

AxisSplit split_axis(const Shape& shape, int axis, bool keepdims) {
    if (axis < 0 || axis >= static_cast<int>(shape.size()))
        throw ContractViolation("axis " + std::to_string(axis) + " out of range for " + shape_str(shape));
    AxisSplit s{1, shape[axis], 1, {}};
    for (int i = 0; i < axis; ++i)
        s.outer *= shape[i];
    for (size_t i = axis + 1; i < shape.size(); ++i)
        s.inner *= shape[i];
    for (size_t i = 0; i < shape.size(); ++i) {
        if (static_cast<int>(i) == axis) {
            if (keepdims)
                s.out_shape.push_back(1);
        } else {
            s.out_shape.push_back(shape[i]);
        }
    }
    return s;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, [](double x, double y) { return x + y; },
        [](double, double, double g, double& da, double& db) {
            da = g;
            db = g;
        });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, [](double x, double y) { return x - y; },
        [](double, double, double g, double& da, double& db) {
            da = g;
            db = -g;
        });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, [](double x, double y) { return x * y; },
        [](double x, double y, double g, double& da, double& db) {
            da = g * y;
            db = g * x;
        });
}

Tensor div(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, [](double x, double y) { return x / y; },
        [](double x, double y, double g, double& da, double& db) {
            da = g / y;
            db = -g * x / (y * y);
        });
}

Tensor maximum(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, [](double x, double y) { return x >= y ? x : y; },
        [](double x, double y, double g, double& da, double& db) {
            if (x >= y)
                da = g;
            else
                db = g;
        });
}

Tensor minimum(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, [](double x, double y) { return x <= y ? x : y; },
        [](double x, double y, double g, double& da, double& db) {
            if (x <= y)
                da = g;
            else
                db = g;
        });
}

Tensor add(const Tensor& a, double c) {
    return unary_op(
        a, [c](double x) { return x + c; }, [](double, double, double g) { return g; });
}

Tensor mul(const Tensor& a, double c) {
    return unary_op(
        a, [c](double x) { return x * c; }, [c](double, double, double g) { return g * c; });
}

Tensor neg(const Tensor& a) {
    return mul(a, -1.0);
}

Tensor exp(const Tensor& a) {
    return unary_op(
        a, [](double x) { return std::exp(x); }, [](double, double y, double g) { return g * y; });
}

Tensor log(const Tensor& a) {
    return unary_op(
        a, [](double x) { return std::log(x); }, [](double x, double, double g) { return g / x; });
}

Tensor sqrt(const Tensor& a) {
    return unary_op(
        a, [](double x) { return std::sqrt(x); },
        [](double, double y, double g) { return y > 0.0 ? g * 0.5 / y : 0.0; });
}

Tensor abs(const Tensor& a) {
    return unary_op(
        a, [](double x) { return std::fabs(x); },
        [](double x, double, double g) { return x > 0.0 ? g : (x < 0.0 ? -g : 0.0); });
}

Tensor relu(const Tensor& a) {
    return unary_op(
        a, [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double, double g) { return x > 0.0 ? g : 0.0; });
}

Tensor sigmoid(const Tensor& a) {
    return unary_op(
        a,
        [](double x) {
            if (x >= 0.0)
                return 1.0 / (1.0 + std::exp(-x));
            const double e = std::exp(x);
            return e / (1.0 + e);
        },
        [](double, double y, double g) { return g * y * (1.0 - y); });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.shape().size() != 2 || b.shape().size() != 2 || a.shape()[1] != b.shape()[0])
        throw ContractViolation("matmul shape mismatch: " + shape_str(a.shape()) + " x " +
                                shape_str(b.shape()));
    const int64_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
    const auto& av = a.data();
    const auto& bv = b.data();
    std::vector<double> out(static_cast<size_t>(m * n), 0.0);
    for (int64_t i = 0; i < m; ++i)
        for (int64_t p = 0; p < k; ++p) {
            const double x = av[i * k + p];
            if (x == 0.0)
                continue;
            const double* brow = &bv[p * n];
            double* orow = &out[i * n];
            for (int64_t j = 0; j < n; ++j)
                orow[j] += x * brow[j];
        }
    NodePtr pa = a.node(), pb = b.node();
    return make_result({m, n}, std::move(out), {pa, pb}, [pa, pb, m, k, n](Node& self) {
        const auto& g = self.grad;
        if (pa->requires_grad) {
            pa->ensure_grad();
            // dA[i,p] += sum_j g[i,j] * B[p,j]
            for (int64_t i = 0; i < m; ++i)
                for (int64_t p = 0; p < k; ++p) {
                    double acc = 0.0;
                    const double* grow = &g[i * n];
                    const double* brow = &pb->value[p * n];
                    for (int64_t j = 0; j < n; ++j)
                        acc += grow[j] * brow[j];
                    pa->grad[i * k + p] += acc;
                }
        }
        if (pb->requires_grad) {
            pb->ensure_grad();
            // dB[p,j] += sum_i A[i,p] * g[i,j]
            for (int64_t i = 0; i < m; ++i)
                for (int64_t p = 0; p < k; ++p) {
                    const double x = pa->value[i * k + p];
                    if (x == 0.0)
                        continue;
                    const double* grow = &g[i * n];
                    double* brow = &pb->grad[p * n];
                    for (int64_t j = 0; j < n; ++j)
                        brow[j] += x * grow[j];
                }
        }
    });
}

Tensor transpose(const Tensor& a) {
    if (a.shape().size() != 2)
        throw ContractViolation("transpose requires a 2-D tensor, got " + shape_str(a.shape()));
    const int64_t m = a.shape()[0], n = a.shape()[1];
    const auto& av = a.data();
    std::vector<double> out(av.size());
    for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j)
            out[j * m + i] = av[i * n + j];
    NodePtr pa = a.node();
    return make_result({n, m}, std::move(out), {pa}, [pa, m, n](Node& self) {
        pa->ensure_grad();
        for (int64_t i = 0; i < m; ++i)
            for (int64_t j = 0; j < n; ++j)
                pa->grad[i * n + j] += self.grad[j * m + i];
    });
}

Tensor sum(const Tensor& a) {
    const auto& av = a.data();
    double s = 0.0;
    for (double v : av)
        s += v;
    NodePtr pa = a.node();
    return make_result({}, {s}, {pa}, [pa](Node& self) {
        pa->ensure_grad();
        const double g = self.grad[0];
        for (auto& gv : pa->grad)
            gv += g;
    });
}

Tensor mean(const Tensor& a) {
    if (a.numel() == 0)
        throw ContractViolation("mean of empty tensor");
    return mul(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor max(const Tensor& a) {
    const auto& av = a.data();
    if (av.empty())
        throw ContractViolation("max of empty tensor");
    size_t arg = 0;
    for (size_t i = 1; i < av.size(); ++i)
        if (av[i] > av[arg])
            arg = i;
    NodePtr pa = a.node();
    return make_result({}, {av[arg]}, {pa}, [pa, arg](Node& self) {
        pa->ensure_grad();
        pa->grad[arg] += self.grad[0];
    });
}

Tensor sum(const Tensor& a, int axis, bool keepdims) {
    AxisSplit s = split_axis(a.shape(), axis, keepdims);
    const auto& av = a.data();
    std::vector<double> out(static_cast<size_t>(s.outer * s.inner), 0.0);
    for (int64_t o = 0; o < s.outer; ++o)
        for (int64_t i = 0; i < s.n; ++i) {
            const double* row = &av[(o * s.n + i) * s.inner];
            double* orow = &out[o * s.inner];
            for (int64_t j = 0; j < s.inner; ++j)
                orow[j] += row[j];
        }
    NodePtr pa = a.node();
    return make_result(s.out_shape, std::move(out), {pa}, [pa, s](Node& self) {
        pa->ensure_grad();
        for (int64_t o = 0; o < s.outer; ++o)
            for (int64_t i = 0; i < s.n; ++i) {
                double* row = &pa->grad[(o * s.n + i) * s.inner];
                const double* grow = &self.grad[o * s.inner];
                for (int64_t j = 0; j < s.inner; ++j)
                    row[j] += grow[j];
            }
    });
}

Tensor mean(const Tensor& a, int axis, bool keepdims) {
    AxisSplit s = split_axis(a.shape(), axis, keepdims);
    if (s.n == 0)
        throw ContractViolation("mean over empty axis");
    return mul(sum(a, axis, keepdims), 1.0 / static_cast<double>(s.n));
}

Tensor max(const Tensor& a, int axis, bool keepdims) {
    AxisSplit s = split_axis(a.shape(), axis, keepdims);
    if (s.n == 0)
        throw ContractViolation("max over empty axis");
    const auto& av = a.data();
    std::vector<double> out(static_cast<size_t>(s.outer * s.inner));
    auto argmax = std::make_shared<std::vector<int64_t>>(out.size());
    for (int64_t o = 0; o < s.outer; ++o)
        for (int64_t j = 0; j < s.inner; ++j) {
            int64_t best = 0;
            double bv = av[(o * s.n) * s.inner + j];
            for (int64_t i = 1; i < s.n; ++i) {
                const double v = av[(o * s.n + i) * s.inner + j];
                if (v > bv) {
                    bv = v;
                    best = i;
                }
            }
            out[o * s.inner + j] = bv;
            (*argmax)[o * s.inner + j] = best;
        }
    NodePtr pa = a.node();
    return make_result(s.out_shape, std::move(out), {pa}, [pa, s, argmax](Node& self) {
        pa->ensure_grad();
        for (int64_t o = 0; o < s.outer; ++o)
            for (int64_t j = 0; j < s.inner; ++j) {
                const int64_t i = (*argmax)[o * s.inner + j];
                pa->grad[(o * s.n + i) * s.inner + j] += self.grad[o * s.inner + j];
            }
    });
}

Tensor softmax(const Tensor& a) {
    if (a.shape().empty())
        throw ContractViolation("softmax needs at least one axis");
    const int64_t n = a.shape().back();
    const int64_t rows = a.numel() / n;
    const auto& av = a.data();
    std::vector<double> out(av.size());
    for (int64_t r = 0; r < rows; ++r) {
        const double* x = &av[r * n];
        double* y = &out[r * n];
        double mx = x[0];
        for (int64_t i = 1; i < n; ++i)
            mx = std::max(mx, x[i]);
        double s = 0.0;
        for (int64_t i = 0; i < n; ++i) {
            y[i] = std::exp(x[i] - mx);
            s += y[i];
        }
        for (int64_t i = 0; i < n; ++i)
            y[i] /= s;
    }
    NodePtr pa = a.node();
    return make_result(a.shape(), std::move(out), {pa}, [pa, rows, n](Node& self) {
        pa->ensure_grad();
        for (int64_t r = 0; r < rows; ++r) {
            const double* y = &self.value[r * n];
            const double* g = &self.grad[r * n];
            double dot = 0.0;
            for (int64_t i = 0; i < n; ++i)
                dot += y[i] * g[i];
            double* da = &pa->grad[r * n];
            for (int64_t i = 0; i < n; ++i)
                da[i] += y[i] * (g[i] - dot);
        }
    });
}

Tensor log_softmax(const Tensor& a) {
    if (a.shape().empty())
        throw ContractViolation("log_softmax needs at least one axis");
    const int64_t n = a.shape().back();
    const int64_t rows = a.numel() / n;
    const auto& av = a.data();
    std::vector<double> out(av.size());
    for (int64_t r = 0; r < rows; ++r) {
        const double* x = &av[r * n];
        double* y = &out[r * n];
        double mx = x[0];
        for (int64_t i = 1; i < n; ++i)
            mx = std::max(mx, x[i]);
        double s = 0.0;
        for (int64_t i = 0; i < n; ++i)
            s += std::exp(x[i] - mx);
        const double lse = mx + std::log(s);
        for (int64_t i = 0; i < n; ++i)
            y[i] = x[i] - lse;
    }
    NodePtr pa = a.node();
    return make_result(a.shape(), std::move(out), {pa}, [pa, rows, n](Node& self) {
        pa->ensure_grad();
        for (int64_t r = 0; r < rows; ++r) {
            const double* y = &self.value[r * n];
            const double* g = &self.grad[r * n];
            double gs = 0.0;
            for (int64_t i = 0; i < n; ++i)
                gs += g[i];
            double* da = &pa->grad[r * n];
            for (int64_t i = 0; i < n; ++i)
                da[i] += g[i] - std::exp(y[i]) * gs;
        }
    });
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
    if (parts.empty())
        throw ContractViolation("concat of zero tensors");
    const Shape& s0 = parts[0].shape();
    if (axis < 0 || axis >= static_cast<int>(s0.size()))
        throw ContractViolation("concat axis out of range");
    int64_t total_axis = 0;
    for (const auto& p : parts) {
        const Shape& s = p.shape();
        if (s.size() != s0.size())
            throw ContractViolation("concat rank mismatch");
        for (size_t i = 0; i < s.size(); ++i)
            if (static_cast<int>(i) != axis && s[i] != s0[i])
                throw ContractViolation("concat shape mismatch on non-concat axis");
        total_axis += s[axis];
    }
    Shape out_shape = s0;
    out_shape[axis] = total_axis;
    int64_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i)
        outer *= s0[i];
    for (size_t i = axis + 1; i < s0.size(); ++i)
        inner *= s0[i];

    std::vector<double> out(static_cast<size_t>(numel_of(out_shape)));
    std::vector<int64_t> lens;
    std::vector<NodePtr> parents;
    int64_t off = 0;
    for (const auto& p : parts) {
        const int64_t len = p.shape()[axis];
        lens.push_back(len);
        parents.push_back(p.node());
        const auto& pv = p.data();
        for (int64_t o = 0; o < outer; ++o)
            std::copy(pv.begin() + o * len * inner, pv.begin() + (o + 1) * len * inner,
                      out.begin() + (o * total_axis + off) * inner);
        off += len;
    }
    return make_result(out_shape, std::move(out), parents,
                       [parents, lens, outer, inner, total_axis](Node& self) {
                           int64_t off2 = 0;
                           for (size_t k = 0; k < parents.size(); ++k) {
                               const int64_t len = lens[k];
                               if (parents[k]->requires_grad) {
                                   parents[k]->ensure_grad();
                                   for (int64_t o = 0; o < outer; ++o) {
                                       const double* g = &self.grad[(o * total_axis + off2) * inner];
                                       double* dst = &parents[k]->grad[o * len * inner];
                                       for (int64_t t = 0; t < len * inner; ++t)
                                           dst[t] += g[t];
                                   }
                               }
                               off2 += len;
                           }
                       });
}

Tensor reshape(const Tensor& a, const Shape& shape) {
    Shape out = shape;
    int64_t known = 1;
    int infer = -1;
    for (size_t i = 0; i < out.size(); ++i) {
        if (out[i] == -1) {
            if (infer >= 0)
                throw ContractViolation("reshape allows at most one -1 axis");
            infer = static_cast<int>(i);
        } else {
            known *= out[i];
        }
    }
    if (infer >= 0) {
        if (known == 0 || a.numel() % known != 0)
            throw ContractViolation("reshape cannot infer axis");
        out[infer] = a.numel() / known;
    }
    if (numel_of(out) != a.numel())
        throw ContractViolation("reshape " + shape_str(a.shape()) + " -> " + shape_str(shape) +
                                " changes element count");
    NodePtr pa = a.node();
    return make_result(out, a.data(), {pa}, [pa](Node& self) {
        pa->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i)
            pa->grad[i] += self.grad[i];
    });
}

Tensor slice(const Tensor& a, int axis, int64_t start, int64_t len) {
    const Shape& s = a.shape();
    if (axis < 0 || axis >= static_cast<int>(s.size()))
        throw ContractViolation("slice axis out of range");
    if (start < 0 || len < 0 || start + len > s[axis])
        throw ContractViolation("slice range out of bounds");
    int64_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i)
        outer *= s[i];
    for (size_t i = axis + 1; i < s.size(); ++i)
        inner *= s[i];
    const int64_t n = s[axis];
    Shape out_shape = s;
    out_shape[axis] = len;
    const auto& av = a.data();
    std::vector<double> out(static_cast<size_t>(outer * len * inner));
    for (int64_t o = 0; o < outer; ++o)
        std::copy(av.begin() + (o * n + start) * inner, av.begin() + (o * n + start + len) * inner,
                  out.begin() + o * len * inner);
    NodePtr pa = a.node();
    return make_result(out_shape, std::move(out), {pa}, [pa, outer, inner, n, start, len](Node& self) {
        pa->ensure_grad();
        for (int64_t o = 0; o < outer; ++o) {
            const double* g = &self.grad[o * len * inner];
            double* dst = &pa->grad[(o * n + start) * inner];
            for (int64_t t = 0; t < len * inner; ++t)
                dst[t] += g[t];
        }
    });
}

Tensor mask_grad(const Tensor& a, const std::vector<uint8_t>& learnable) {
    if (static_cast<int64_t>(learnable.size()) != a.numel())
        throw ContractViolation("mask_grad mask size mismatch");
    NodePtr pa = a.node();
    auto mask = std::make_shared<std::vector<uint8_t>>(learnable);
    return make_result(a.shape(), a.data(), {pa}, [pa, mask](Node& self) {
        pa->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i)
            if ((*mask)[i])
                pa->grad[i] += self.grad[i];
    });
}

Tensor detach(const Tensor& a) {
    return Tensor::from_data(a.shape(), a.data(), false);
}

Tensor l2_norm(const Tensor& a) {
    return sqrt(sum(mul(a, a)));
}

Tensor l1_norm(const Tensor& a) {
    return sum(abs(a));
}

Tensor bce_with_logits(const Tensor& logits, const Tensor& targets) {
    // max(x,0) - x*z + log(1 + exp(-|x|)), stable for large |x|.
    Tensor x = logits;
    Tensor z = targets;
    Tensor soft = log(add(exp(neg(abs(x))), 1.0));
    return add(sub(relu(x), mul(x, z)), soft);
}

}  // namespace numcore
