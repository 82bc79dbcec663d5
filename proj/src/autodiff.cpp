#include "retdecomp/autodiff.hpp"

#include "retdecomp/errors.hpp"

#include <cmath>
#include <string>

namespace retdecomp {

const Tensor& Var::value() const { return tape->value(id); }

double Var::scalar() const
{
    const auto& v = value();
    if (v.size() != 1) throw UsageError("Var::scalar on a non-scalar node");
    return v(0, 0);
}

Var Tape::constant(Tensor value)
{
    nodes_.push_back(Node{std::move(value), {}, false, {}});
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::parameter(Parameter& p)
{
    Parameter* target = &p;
    nodes_.push_back(Node{p.value, {}, true, [target](Tape&, const Tensor&, const Tensor& g) {
                              if (target->grad.rows() != g.rows() || target->grad.cols() != g.cols())
                                  target->grad = g;
                              else
                                  target->grad += g;
                          }});
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::record(Tensor value, std::initializer_list<Var> parents, BackwardFn fn)
{
    return record(std::move(value), std::span<const Var>(parents.begin(), parents.size()), std::move(fn));
}

Var Tape::record(Tensor value, std::span<const Var> parents, BackwardFn fn)
{
    bool needs = false;
    for (const auto& p : parents) {
        if (p.tape != this) throw UsageError("operand recorded on a different tape");
        needs = needs || nodes_[static_cast<std::size_t>(p.id)].requires_grad;
    }
    nodes_.push_back(Node{std::move(value), {}, needs, needs ? std::move(fn) : BackwardFn{}});
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::backward(Var loss)
{
    if (loss.tape != this) throw UsageError("backward: loss is not on this tape");
    auto& root = nodes_[static_cast<std::size_t>(loss.id)];
    if (root.value.size() != 1)
        throw UsageError("backward: loss must be scalar, got " + std::to_string(root.value.rows()) + "x" +
                         std::to_string(root.value.cols()));
    for (auto& n : nodes_) n.grad.resize(0, 0);
    if (!root.requires_grad) return;
    root.grad = Tensor::Ones(1, 1);
    for (int i = loss.id; i >= 0; --i) {
        auto& n = nodes_[static_cast<std::size_t>(i)];
        if (!n.requires_grad || n.grad.size() == 0 || !n.backward) continue;
        n.backward(*this, n.value, n.grad);
    }
}

namespace ad {
namespace {

void require_same_shape(Var a, Var b, const char* op)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ConfigError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()));
}

}  // namespace

Var matmul(Var a, Var b)
{
    if (a.cols() != b.rows())
        throw ConfigError("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                          std::to_string(b.rows()) + ")");
    Tape& t = *a.tape;
    Tensor out = a.value() * b.value();
    return t.record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor&, const Tensor& g) {
        if (t.requires_grad(a)) t.accumulate(a.id, g * t.value(b.id).transpose());
        if (t.requires_grad(b)) t.accumulate(b.id, t.value(a.id).transpose() * g);
    });
}

Var add(Var a, Var b)
{
    require_same_shape(a, b, "add");
    return a.tape->record(a.value() + b.value(), {a, b}, [a, b](Tape& t, const Tensor&, const Tensor& g) {
        t.accumulate(a.id, g);
        t.accumulate(b.id, g);
    });
}

Var sub(Var a, Var b)
{
    require_same_shape(a, b, "sub");
    return a.tape->record(a.value() - b.value(), {a, b}, [a, b](Tape& t, const Tensor&, const Tensor& g) {
        t.accumulate(a.id, g);
        t.accumulate(b.id, -g);
    });
}

Var mul(Var a, Var b)
{
    require_same_shape(a, b, "mul");
    Tensor out = a.value().cwiseProduct(b.value());
    return a.tape->record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor&, const Tensor& g) {
        if (t.requires_grad(a)) t.accumulate(a.id, g.cwiseProduct(t.value(b.id)));
        if (t.requires_grad(b)) t.accumulate(b.id, g.cwiseProduct(t.value(a.id)));
    });
}

Var div(Var a, Var b)
{
    require_same_shape(a, b, "div");
    Tensor out = a.value().cwiseQuotient(b.value());
    return a.tape->record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor&, const Tensor& g) {
        const Tensor& bv = t.value(b.id);
        if (t.requires_grad(a)) t.accumulate(a.id, g.cwiseQuotient(bv));
        if (t.requires_grad(b)) {
            Tensor gb = -(g.array() * t.value(a.id).array() / bv.array().square()).matrix();
            t.accumulate(b.id, gb);
        }
    });
}

Var add_row(Var a, Var row)
{
    if (row.rows() != 1 || row.cols() != a.cols()) throw ConfigError("add_row: bias width mismatch");
    Tensor out = a.value().rowwise() + row.value().row(0);
    return a.tape->record(std::move(out), {a, row}, [a, row](Tape& t, const Tensor&, const Tensor& g) {
        t.accumulate(a.id, g);
        if (t.requires_grad(row)) t.accumulate(row.id, g.colwise().sum());
    });
}

Var sub_col(Var a, Var col)
{
    if (col.cols() != 1 || col.rows() != a.rows()) throw ConfigError("sub_col: column height mismatch");
    Tensor out = a.value().colwise() - col.value().col(0);
    return a.tape->record(std::move(out), {a, col}, [a, col](Tape& t, const Tensor&, const Tensor& g) {
        t.accumulate(a.id, g);
        if (t.requires_grad(col)) t.accumulate(col.id, -g.rowwise().sum());
    });
}

Var mul_col(Var a, Var col)
{
    if (col.cols() != 1 || col.rows() != a.rows()) throw ConfigError("mul_col: column height mismatch");
    Tensor out = a.value().array().colwise() * col.value().col(0).array();
    return a.tape->record(std::move(out), {a, col}, [a, col](Tape& t, const Tensor&, const Tensor& g) {
        const Tensor& cv = t.value(col.id);
        if (t.requires_grad(a)) {
            Tensor ga = g.array().colwise() * cv.col(0).array();
            t.accumulate(a.id, ga);
        }
        if (t.requires_grad(col)) t.accumulate(col.id, g.cwiseProduct(t.value(a.id)).rowwise().sum());
    });
}

Var scale(Var a, double c)
{
    return a.tape->record(a.value() * c, {a}, [a, c](Tape& t, const Tensor&, const Tensor& g) { t.accumulate(a.id, g * c); });
}

Var add_scalar(Var a, double c)
{
    Tensor out = a.value().array() + c;
    return a.tape->record(std::move(out), {a}, [a](Tape& t, const Tensor&, const Tensor& g) { t.accumulate(a.id, g); });
}

Var neg(Var a) { return scale(a, -1.0); }

Var relu(Var a)
{
    Tensor out = a.value().cwiseMax(0.0);
    return a.tape->record(std::move(out), {a}, [a](Tape& t, const Tensor&, const Tensor& g) {
        Tensor ga = (t.value(a.id).array() > 0.0).select(g, 0.0);
        t.accumulate(a.id, ga);
    });
}

Var tanh(Var a)
{
    Tensor out = a.value().array().tanh();
    return a.tape->record(std::move(out), {a}, [a](Tape& t, const Tensor& y, const Tensor& g) {
        t.accumulate(a.id, (g.array() * (1.0 - y.array().square())).matrix());
    });
}

Var exp(Var a)
{
    Tensor out = a.value().array().exp();
    return a.tape->record(std::move(out), {a}, [a](Tape& t, const Tensor&, const Tensor& g) {
        t.accumulate(a.id, (g.array() * t.value(a.id).array().exp()).matrix());
    });
}

Var log(Var a)
{
    Tensor out = a.value().array().log();
    return a.tape->record(std::move(out), {a}, [a](Tape& t, const Tensor&, const Tensor& g) {
        t.accumulate(a.id, g.cwiseQuotient(t.value(a.id)));
    });
}

namespace {
double softplus_scalar(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double sigmoid_scalar(double x)
{
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}
}  // namespace

Var softplus(Var a)
{
    Tensor out = a.value().unaryExpr(&softplus_scalar);
    return a.tape->record(std::move(out), {a}, [a](Tape& t, const Tensor&, const Tensor& g) {
        t.accumulate(a.id, g.cwiseProduct(t.value(a.id).unaryExpr(&sigmoid_scalar)));
    });
}

Var sigmoid(Var a)
{
    Tensor out = a.value().unaryExpr(&sigmoid_scalar);
    return a.tape->record(std::move(out), {a}, [a](Tape& t, const Tensor& y, const Tensor& g) {
        t.accumulate(a.id, (g.array() * y.array() * (1.0 - y.array())).matrix());
    });
}

Var square(Var a)
{
    Tensor out = a.value().array().square();
    return a.tape->record(std::move(out), {a}, [a](Tape& t, const Tensor&, const Tensor& g) {
        t.accumulate(a.id, (2.0 * g.array() * t.value(a.id).array()).matrix());
    });
}

Var clamp(Var a, double lo, double hi)
{
    Tensor out = a.value().cwiseMax(lo).cwiseMin(hi);
    return a.tape->record(std::move(out), {a}, [a, lo, hi](Tape& t, const Tensor&, const Tensor& g) {
        const auto& x = t.value(a.id).array();
        Tensor ga = ((x >= lo) && (x <= hi)).select(g, 0.0);
        t.accumulate(a.id, ga);
    });
}

Var sum(Var a)
{
    Tensor out(1, 1);
    out(0, 0) = a.value().sum();
    const auto r = a.rows(), c = a.cols();
    return a.tape->record(std::move(out), {a}, [a, r, c](Tape& t, const Tensor&, const Tensor& g) {
        t.accumulate(a.id, Tensor::Constant(r, c, g(0, 0)));
    });
}

Var mean(Var a)
{
    const double n = static_cast<double>(a.value().size());
    if (n == 0) throw UsageError("mean of an empty tensor");
    return scale(sum(a), 1.0 / n);
}

Var sum_cols(Var a)
{
    Tensor out = a.value().rowwise().sum();
    const auto c = a.cols();
    return a.tape->record(std::move(out), {a}, [a, c](Tape& t, const Tensor&, const Tensor& g) {
        t.accumulate(a.id, g.col(0).replicate(1, c));
    });
}

Var logsumexp_rows(Var a)
{
    const Tensor& x = a.value();
    Eigen::VectorXd m = x.rowwise().maxCoeff();
    Tensor shifted = x.colwise() - m;
    Eigen::VectorXd s = shifted.array().exp().rowwise().sum();
    Tensor out(x.rows(), 1);
    out.col(0) = m.array() + s.array().log();
    return a.tape->record(std::move(out), {a}, [a](Tape& t, const Tensor& lse, const Tensor& g) {
        // d lse / d x_j = softmax_j
        Tensor soft = (t.value(a.id).colwise() - lse.col(0)).array().exp();
        Tensor ga = soft.array().colwise() * g.col(0).array();
        t.accumulate(a.id, ga);
    });
}

Var concat_cols(std::span<const Var> parts)
{
    if (parts.empty()) throw UsageError("concat_cols: no operands");
    const auto rows = parts[0].rows();
    Eigen::Index cols = 0;
    for (const auto& p : parts) {
        if (p.rows() != rows) throw ConfigError("concat_cols: row count mismatch");
        cols += p.cols();
    }
    Tensor out(rows, cols);
    std::vector<Eigen::Index> offsets;
    Eigen::Index off = 0;
    for (const auto& p : parts) {
        out.middleCols(off, p.cols()) = p.value();
        offsets.push_back(off);
        off += p.cols();
    }
    std::vector<Var> ps(parts.begin(), parts.end());
    return parts[0].tape->record(std::move(out), parts, [ps, offsets](Tape& t, const Tensor&, const Tensor& g) {
        for (std::size_t i = 0; i < ps.size(); ++i)
            if (t.requires_grad(ps[i])) t.accumulate(ps[i].id, g.middleCols(offsets[i], ps[i].cols()));
    });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count)
{
    if (start < 0 || count < 0 || start + count > a.cols()) throw ConfigError("slice_cols: out of range");
    Tensor out = a.value().middleCols(start, count);
    const auto r = a.rows(), c = a.cols();
    return a.tape->record(std::move(out), {a}, [a, start, count, r, c](Tape& t, const Tensor&, const Tensor& g) {
        Tensor ga = Tensor::Zero(r, c);
        ga.middleCols(start, count) = g;
        t.accumulate(a.id, ga);
    });
}

Var straight_through(const Tensor& hard, Var soft)
{
    if (hard.rows() != soft.rows() || hard.cols() != soft.cols())
        throw ConfigError("straight_through: shape mismatch");
    return soft.tape->record(hard, {soft}, [soft](Tape& t, const Tensor&, const Tensor& g) { t.accumulate(soft.id, g); });
}

}  // namespace ad
}  // namespace retdecomp
