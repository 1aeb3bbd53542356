#include "adadrug/tape.hpp"

#include "adadrug/error.hpp"

#include <algorithm>
#include <cmath>

namespace adadrug {

const char* op_name(Op op) {
    switch (op) {
        case Op::Leaf: return "leaf";
        case Op::MatMul: return "matmul";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::EwMul: return "ewmul";
        case Op::Scale: return "scale";
        case Op::AddScalar: return "add_scalar";
        case Op::AddBias: return "add_bias";
        case Op::Relu: return "relu";
        case Op::Sigmoid: return "sigmoid";
        case Op::Abs: return "abs";
        case Op::Log: return "log";
        case Op::Clamp: return "clamp";
        case Op::SumAll: return "sum_all";
        case Op::MeanAll: return "mean_all";
        case Op::RowSum: return "row_sum";
        case Op::GradReverse: return "grad_reverse";
    }
    return "?";
}

const Matrix& Var::value() const { return tape->value(*this); }
const Matrix& Var::grad() const { return tape->grad(*this); }

double Var::scalar() const {
    const Matrix& v = value();
    if (v.rows() != 1 || v.cols() != 1) {
        throw ContractError("scalar() on a " + v.shape() + " node");
    }
    return v(0, 0);
}

Var Tape::variable(Matrix value) {
    Node n;
    n.grad = Matrix(value.rows(), value.cols());
    n.value = std::move(value);
    n.requires_grad = true;
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

Var Tape::constant(Matrix value) {
    Node n;
    n.grad = Matrix(value.rows(), value.cols());
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

Var Tape::push(Op op, Matrix value, std::uint32_t a, std::uint32_t b, double c0, double c1) {
    Node n;
    n.op = op;
    n.parents = {a, b};
    n.c0 = c0;
    n.c1 = c1;
    n.requires_grad = nodes_[a].requires_grad || (b != kNone && nodes_[b].requires_grad);
    n.grad = Matrix(value.rows(), value.cols());
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

void Tape::zero_grads() {
    for (auto& n : nodes_) {
        n.grad.fill(0.0);
    }
}

double Tape::min_kink_distance() const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& n : nodes_) {
        if (n.op == Op::Relu || n.op == Op::Abs) {
            for (double v : parent_value(n, 0).values()) best = std::min(best, std::abs(v));
        } else if (n.op == Op::Clamp) {
            for (double v : parent_value(n, 0).values()) {
                best = std::min({best, std::abs(v - n.c0), std::abs(v - n.c1)});
            }
        }
    }
    return best;
}

void Tape::backward(Var loss) {
    if (loss.tape != this) {
        throw ContractError("backward: loss belongs to another tape");
    }
    Node& root = nodes_[loss.id];
    if (root.value.rows() != 1 || root.value.cols() != 1) {
        throw ContractError("backward: loss must be 1x1, got " + root.value.shape());
    }
    // Interior adjoints are per-sweep; only leaves accumulate across calls.
    for (auto& n : nodes_) {
        if (n.op != Op::Leaf) {
            n.grad.fill(0.0);
        }
    }
    root.grad(0, 0) = root.op == Op::Leaf ? root.grad(0, 0) + 1.0 : 1.0;
    for (std::size_t i = loss.id + 1; i-- > 0;) {
        const Node& n = nodes_[i];
        if (n.op != Op::Leaf && n.requires_grad) {
            backward_node(n);
        }
    }
}

namespace {

void axpy(Matrix& dst, const Matrix& src, double alpha = 1.0) {
    auto d = dst.values();
    auto s = src.values();
    for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] += alpha * s[i];
    }
}

}  // namespace

void Tape::backward_node(const Node& n) {
    const Matrix& g = n.grad;
    Node& pa = nodes_[n.parents[0]];
    Node* pb = n.parents[1] != kNone ? &nodes_[n.parents[1]] : nullptr;
    const bool ga = pa.requires_grad;
    const bool gb = pb && pb->requires_grad;

    switch (n.op) {
        case Op::Leaf:
            break;
        case Op::MatMul:
            if (ga) kernels::matmul_nt_acc(g, pb->value, pa.grad);
            if (gb) kernels::matmul_tn_acc(pa.value, g, pb->grad);
            break;
        case Op::Add:
            if (ga) axpy(pa.grad, g);
            if (gb) axpy(pb->grad, g);
            break;
        case Op::Sub:
            if (ga) axpy(pa.grad, g);
            if (gb) axpy(pb->grad, g, -1.0);
            break;
        case Op::EwMul: {
            auto gv = g.values();
            if (ga) {
                auto dst = pa.grad.values();
                auto other = pb->value.values();
                for (std::size_t i = 0; i < gv.size(); ++i) dst[i] += gv[i] * other[i];
            }
            if (gb) {
                auto dst = pb->grad.values();
                auto other = pa.value.values();
                for (std::size_t i = 0; i < gv.size(); ++i) dst[i] += gv[i] * other[i];
            }
            break;
        }
        case Op::Scale:
            if (ga) axpy(pa.grad, g, n.c0);
            break;
        case Op::AddScalar:
            if (ga) axpy(pa.grad, g);
            break;
        case Op::AddBias:
            if (ga) axpy(pa.grad, g);
            if (gb) {
                for (std::size_t r = 0; r < g.rows(); ++r) {
                    for (std::size_t c = 0; c < g.cols(); ++c) pb->grad(0, c) += g(r, c);
                }
            }
            break;
        case Op::Relu: {
            auto gv = g.values();
            auto x = pa.value.values();
            auto dst = pa.grad.values();
            for (std::size_t i = 0; i < gv.size(); ++i) dst[i] += x[i] > 0.0 ? gv[i] : 0.0;
            break;
        }
        case Op::Sigmoid: {
            auto gv = g.values();
            auto y = n.value.values();
            auto dst = pa.grad.values();
            for (std::size_t i = 0; i < gv.size(); ++i) dst[i] += gv[i] * y[i] * (1.0 - y[i]);
            break;
        }
        case Op::Abs: {
            auto gv = g.values();
            auto x = pa.value.values();
            auto dst = pa.grad.values();
            for (std::size_t i = 0; i < gv.size(); ++i) {
                dst[i] += x[i] > 0.0 ? gv[i] : (x[i] < 0.0 ? -gv[i] : 0.0);
            }
            break;
        }
        case Op::Log: {
            auto gv = g.values();
            auto x = pa.value.values();
            auto dst = pa.grad.values();
            for (std::size_t i = 0; i < gv.size(); ++i) dst[i] += gv[i] / x[i];
            break;
        }
        case Op::Clamp: {
            auto gv = g.values();
            auto x = pa.value.values();
            auto dst = pa.grad.values();
            for (std::size_t i = 0; i < gv.size(); ++i) {
                if (x[i] >= n.c0 && x[i] <= n.c1) dst[i] += gv[i];
            }
            break;
        }
        case Op::SumAll:
            for (double& v : pa.grad.values()) v += g(0, 0);
            break;
        case Op::MeanAll: {
            const double s = g(0, 0) / static_cast<double>(pa.value.size());
            for (double& v : pa.grad.values()) v += s;
            break;
        }
        case Op::RowSum:
            for (std::size_t r = 0; r < pa.grad.rows(); ++r) {
                for (double& v : pa.grad.row(r)) v += g(r, 0);
            }
            break;
        case Op::GradReverse:
            axpy(pa.grad, g, -n.c0);
            break;
    }
}

namespace {

void check_same(const Matrix& a, const Matrix& b, const char* what) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(what) + ": " + a.shape() + " vs " + b.shape());
    }
}

void check_tape(Var a, Var b) {
    if (a.tape != b.tape) {
        throw ContractError("operands live on different tapes");
    }
}

template <typename F>
Matrix map(const Matrix& x, F f) {
    Matrix out(x.rows(), x.cols());
    auto src = x.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
    return out;
}

}  // namespace

Var matmul(Var a, Var b) {
    check_tape(a, b);
    Matrix v = kernels::matmul(a.value(), b.value());
    return a.tape->push(Op::MatMul, std::move(v), a.id, b.id);
}

Var add(Var a, Var b) {
    check_tape(a, b);
    check_same(a.value(), b.value(), "add");
    Matrix v = a.value();
    auto dst = v.values();
    auto src = b.value().values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    return a.tape->push(Op::Add, std::move(v), a.id, b.id);
}

Var sub(Var a, Var b) {
    check_tape(a, b);
    check_same(a.value(), b.value(), "sub");
    Matrix v = a.value();
    auto dst = v.values();
    auto src = b.value().values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= src[i];
    return a.tape->push(Op::Sub, std::move(v), a.id, b.id);
}

Var ewmul(Var a, Var b) {
    check_tape(a, b);
    check_same(a.value(), b.value(), "ewmul");
    Matrix v = a.value();
    auto dst = v.values();
    auto src = b.value().values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] *= src[i];
    return a.tape->push(Op::EwMul, std::move(v), a.id, b.id);
}

Var scale(Var x, double c) {
    return x.tape->push(Op::Scale, map(x.value(), [c](double v) { return c * v; }), x.id, Tape::kNone, c);
}

Var add_scalar(Var x, double c) {
    return x.tape->push(Op::AddScalar, map(x.value(), [c](double v) { return v + c; }), x.id, Tape::kNone, c);
}

Var add_bias(Var x, Var bias) {
    check_tape(x, bias);
    Matrix v = x.value();
    kernels::add_row_inplace(v, bias.value());
    return x.tape->push(Op::AddBias, std::move(v), x.id, bias.id);
}

Var relu(Var x) {
    Matrix v = x.value();
    kernels::relu_inplace(v);
    return x.tape->push(Op::Relu, std::move(v), x.id);
}

Var sigmoid(Var x) {
    Matrix v = x.value();
    kernels::sigmoid_inplace(v);
    return x.tape->push(Op::Sigmoid, std::move(v), x.id);
}

Var abs(Var x) {
    return x.tape->push(Op::Abs, map(x.value(), [](double v) { return std::abs(v); }), x.id);
}

Var log(Var x) {
    return x.tape->push(Op::Log, map(x.value(), [](double v) { return std::log(v); }), x.id);
}

Var clamp(Var x, double lo, double hi) {
    if (!(lo <= hi)) {
        throw ContractError("clamp: lo > hi");
    }
    return x.tape->push(Op::Clamp, map(x.value(), [lo, hi](double v) { return std::clamp(v, lo, hi); }), x.id,
                        Tape::kNone, lo, hi);
}

Var sum_all(Var x) {
    double s = 0.0;
    for (double v : x.value().values()) s += v;
    return x.tape->push(Op::SumAll, Matrix(1, 1, s), x.id);
}

Var mean_all(Var x) {
    const Matrix& m = x.value();
    if (m.empty()) {
        throw ContractError("mean_all of an empty matrix");
    }
    double s = 0.0;
    for (double v : m.values()) s += v;
    return x.tape->push(Op::MeanAll, Matrix(1, 1, s / static_cast<double>(m.size())), x.id);
}

Var row_sum(Var x) {
    const Matrix& m = x.value();
    Matrix v(m.rows(), 1);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double s = 0.0;
        for (double e : m.row(r)) s += e;
        v(r, 0) = s;
    }
    return x.tape->push(Op::RowSum, std::move(v), x.id);
}

Var grad_reverse(Var x, double lambda) {
    if (lambda < 0.0) {
        throw ContractError("grad_reverse: lambda must be >= 0");
    }
    return x.tape->push(Op::GradReverse, x.value(), x.id, Tape::kNone, lambda);
}

}  // namespace adadrug
