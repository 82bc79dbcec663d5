#pragma once

#include "retdecomp/tensor.hpp"

#include <functional>
#include <span>
#include <vector>

namespace retdecomp {

class Tape;

/// Handle to a node recorded on a Tape.
struct Var {
    Tape* tape = nullptr;
    int id = -1;

    const Tensor& value() const;
    double scalar() const;
    Eigen::Index rows() const { return value().rows(); }
    Eigen::Index cols() const { return value().cols(); }
};

/// Reverse-mode tape. Nodes are appended in evaluation order, which is a
/// topological order, so backward is a single reverse sweep.
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, const Tensor& out_value, const Tensor& out_grad)>;

    Var constant(Tensor value);
    /// Leaf bound to a parameter; backward accumulates into `p.grad`.
    Var parameter(Parameter& p);
    /// Records an operation result. The node requires a gradient when any
    /// parent does; `fn` is dropped otherwise.
    Var record(Tensor value, std::initializer_list<Var> parents, BackwardFn fn);
    Var record(Tensor value, std::span<const Var> parents, BackwardFn fn);

    /// Seeds d loss / d loss = 1 and propagates to every reachable node.
    void backward(Var loss);

    const Tensor& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    /// Gradient of the last backward pass; empty when the node was not reached.
    const Tensor& grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
    const Tensor& grad(Var v) const { return grad(v.id); }
    bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
    bool requires_grad(Var v) const { return requires_grad(v.id); }
    std::size_t size() const { return nodes_.size(); }

    template <class Expr>
    void accumulate(int id, const Eigen::MatrixBase<Expr>& g)
    {
        auto& node = nodes_[static_cast<std::size_t>(id)];
        if (!node.requires_grad) return;
        if (node.grad.size() == 0)
            node.grad = g;
        else
            node.grad += g;
    }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        BackwardFn backward;
    };
    std::vector<Node> nodes_;
};

namespace ad {

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
/// a + row, with `row` (1 x n) broadcast over the rows of a.
Var add_row(Var a, Var row);
/// a - col, with `col` (r x 1) broadcast over the columns of a.
Var sub_col(Var a, Var col);
/// a * col, with `col` (r x 1) broadcast over the columns of a.
Var mul_col(Var a, Var col);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var neg(Var a);

Var relu(Var a);
Var tanh(Var a);
Var exp(Var a);
Var log(Var a);
Var softplus(Var a);
Var sigmoid(Var a);
Var square(Var a);
/// Elementwise clamp; gradient is zero outside [lo, hi].
Var clamp(Var a, double lo, double hi);

Var sum(Var a);
Var mean(Var a);
/// Per-row sum, r x c -> r x 1.
Var sum_cols(Var a);
Var logsumexp_rows(Var a);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);

/// Forward value `hard`, gradient routed to `soft` unchanged.
Var straight_through(const Tensor& hard, Var soft);

}  // namespace ad
}  // namespace retdecomp
