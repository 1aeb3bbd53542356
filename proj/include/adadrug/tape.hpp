#pragma once

#include "adadrug/matrix.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

// Tape-based reverse-mode differentiation over dense matrices.
//
// Every op appends one node to the tape; creation order is a topological order,
// so backward() is a single reverse sweep. A tape is rebuilt per mini-batch and
// is owned by one thread.

namespace adadrug {

enum class Op : std::uint8_t {
    Leaf,
    MatMul,
    Add,
    Sub,
    EwMul,
    Scale,
    AddScalar,
    AddBias,
    Relu,
    Sigmoid,
    Abs,
    Log,
    Clamp,
    SumAll,
    MeanAll,
    RowSum,
    GradReverse,
};

const char* op_name(Op op);

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid as long as the tape lives.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Matrix& value() const;
    const Matrix& grad() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
    /// Value of a 1×1 node.
    double scalar() const;
};

class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Differentiable leaf (parameters).
    Var variable(Matrix value);
    /// Leaf that never receives a gradient (data, labels).
    Var constant(Matrix value);

    const Matrix& value(Var v) const { return nodes_[v.id].value; }
    const Matrix& grad(Var v) const { return nodes_[v.id].grad; }
    Op op(Var v) const { return nodes_[v.id].op; }
    bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
    std::size_t size() const { return nodes_.size(); }

    /// Reverse sweep from a 1×1 loss. Gradients accumulate across calls;
    /// call zero_grads() to reset them.
    void backward(Var loss);
    void zero_grads();

    /// Smallest |input| over all relu/abs nodes, i.e. the distance of the current
    /// point to the nearest non-differentiable kink. +inf when there is none.
    double min_kink_distance() const;

private:
    static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

    struct Node {
        Matrix value;
        Matrix grad;
        Op op = Op::Leaf;
        std::array<std::uint32_t, 2> parents{kNone, kNone};
        double c0 = 0.0;
        double c1 = 0.0;
        bool requires_grad = false;
    };

    Var push(Op op, Matrix value, std::uint32_t a, std::uint32_t b = kNone, double c0 = 0.0, double c1 = 0.0);
    void backward_node(const Node& n);
    const Matrix& parent_value(const Node& n, int which) const { return nodes_[n.parents[which]].value; }

    std::vector<Node> nodes_;

    friend Var matmul(Var, Var);
    friend Var add(Var, Var);
    friend Var sub(Var, Var);
    friend Var ewmul(Var, Var);
    friend Var scale(Var, double);
    friend Var add_scalar(Var, double);
    friend Var add_bias(Var, Var);
    friend Var relu(Var);
    friend Var sigmoid(Var);
    friend Var abs(Var);
    friend Var log(Var);
    friend Var clamp(Var, double, double);
    friend Var sum_all(Var);
    friend Var mean_all(Var);
    friend Var row_sum(Var);
    friend Var grad_reverse(Var, double);
};

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var ewmul(Var a, Var b);
Var scale(Var x, double c);
Var add_scalar(Var x, double c);
/// x: m×n plus a 1×n bias broadcast over the rows.
Var add_bias(Var x, Var bias);
/// Subgradient at 0 is 0.
Var relu(Var x);
Var sigmoid(Var x);
/// Subgradient at 0 is 0.
Var abs(Var x);
/// Natural log; inputs must be positive.
Var log(Var x);
/// Elementwise clamp to [lo, hi]; gradient passes only inside the interval.
Var clamp(Var x, double lo, double hi);
/// 1×1 sum of all entries.
Var sum_all(Var x);
/// 1×1 mean of all entries.
Var mean_all(Var x);
/// m×n -> m×1 sums along each row.
Var row_sum(Var x);
/// Identity forward; backward multiplies the upstream gradient by -lambda.
Var grad_reverse(Var x, double lambda);

}  // namespace adadrug
