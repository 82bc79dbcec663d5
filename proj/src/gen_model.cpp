#include "retdecomp/gen_model.hpp"

#include "retdecomp/errors.hpp"

#include <cmath>

namespace retdecomp {

RewardNet::RewardNet(int d_s, int d_a, int hidden, Rng& rng)
    : d_s_(d_s), d_a_(d_a), mlp_("rew", {d_s + d_a, hidden, hidden, 1}, rng)
{
}

double RewardNet::predict(const Vector& s, const Vector& a, const MaskVector& c_sr, const MaskVector& c_ar) const
{
    Tensor S = s.transpose();
    Tensor A = a.transpose();
    return predict_batch(S, A, c_sr, c_ar)(0, 0);
}

Tensor RewardNet::predict_batch(const Tensor& states, const Tensor& actions, const MaskVector& c_sr,
                                const MaskVector& c_ar) const
{
    if (states.cols() != d_s_ || actions.cols() != d_a_ || c_sr.size() != d_s_ || c_ar.size() != d_a_)
        throw ConfigError("reward net: width mismatch");
    Tensor x(states.rows(), d_s_ + d_a_);
    x.leftCols(d_s_) = states.array().rowwise() * c_sr.cast<double>().transpose().array();
    x.rightCols(d_a_) = actions.array().rowwise() * c_ar.cast<double>().transpose().array();
    return mlp_.infer(x);
}

DynNet::DynNet(int d_s, int d_a, int hidden, bool dim_embedding, Rng& rng)
    : d_s_(d_s),
      d_a_(d_a),
      dim_embedding_(dim_embedding),
      mlp_("dyn", {d_s + d_a + (dim_embedding ? d_s : 0), hidden, hidden, kMdnOutputs}, rng)
{
}

MdnOutput DynNet::predict(const Vector& s, const Vector& a, const MaskMatrix& c_ss, const MaskMatrix& c_as,
                          int dim) const
{
    if (dim < 0 || dim >= d_s_) throw ConfigError("dyn net: dimension out of range");
    if (s.size() != d_s_ || a.size() != d_a_) throw ConfigError("dyn net: width mismatch");
    Tensor x = Tensor::Zero(1, mlp_.input_width());
    for (int k = 0; k < d_s_; ++k) x(0, k) = c_ss(k, dim) ? s(k) : 0.0;
    for (int k = 0; k < d_a_; ++k) x(0, d_s_ + k) = c_as(k, dim) ? a(k) : 0.0;
    if (dim_embedding_) x(0, d_s_ + d_a_ + dim) = 1.0;
    Tensor raw = mlp_.infer(x);
    return decode_mdn(std::span<const double, kMdnOutputs>(raw.data(), kMdnOutputs));
}

namespace {

struct RewardRows {
    Tensor inputs;      // R x (d_s + d_a)
    Tensor discount;    // M x R, gamma^(t-1) on each trajectory's rows
    Tensor returns;     // M x 1
    std::vector<int> group;
};

RewardRows stack_trajectories(std::span<const Trajectory* const> batch, int d_s, int d_a, double gamma)
{
    if (batch.empty()) throw UsageError("reward_loss: empty batch");
    Eigen::Index rows = 0;
    for (const auto* tr : batch) rows += static_cast<Eigen::Index>(tr->length());
    RewardRows out;
    out.inputs.resize(rows, d_s + d_a);
    out.discount = Tensor::Zero(static_cast<Eigen::Index>(batch.size()), rows);
    out.returns.resize(static_cast<Eigen::Index>(batch.size()), 1);
    Eigen::Index r = 0;
    for (std::size_t m = 0; m < batch.size(); ++m) {
        const auto& tr = *batch[m];
        double disc = 1.0;
        for (std::size_t t = 0; t < tr.length(); ++t, ++r) {
            if (tr.states[t].size() != d_s || tr.actions[t].size() != d_a)
                throw ConfigError("reward_loss: trajectory width mismatch");
            out.inputs.row(r).head(d_s) = tr.states[t].transpose();
            out.inputs.row(r).tail(d_a) = tr.actions[t].transpose();
            out.discount(static_cast<Eigen::Index>(m), r) = disc;
            out.group.push_back(static_cast<int>(m));
            disc *= gamma;
        }
        out.returns(static_cast<Eigen::Index>(m), 0) = tr.ret;
    }
    return out;
}

Var reward_loss_from_mask(Tape& tape, const RewardRows& rows, RewardNet& net, Var mask)
{
    Var x = ad::mul(tape.constant(rows.inputs), mask);
    Var r_hat = net.mlp().forward(tape, x);
    Var predicted = ad::matmul(tape.constant(rows.discount), r_hat);
    Var resid = ad::sub(tape.constant(rows.returns), predicted);
    return ad::mean(ad::square(resid));
}

}  // namespace

Var reward_loss(Tape& tape, std::span<const Trajectory* const> batch, RewardNet& net, const MaskLogitVars& logits,
                double temperature, double gamma, Rng& rng)
{
    const int d_s = net.d_s(), d_a = net.d_a();
    RewardRows rows = stack_trajectories(batch, d_s, d_a, gamma);
    // Column c < d_s reads sr edge c; column d_s + k reads ar edge k (after the sr block).
    Eigen::MatrixXi edge_of(rows.inputs.rows(), d_s + d_a);
    for (Eigen::Index r = 0; r < edge_of.rows(); ++r)
        for (int c = 0; c < d_s + d_a; ++c) edge_of(r, c) = c;
    const Var blocks[] = {logits.sr, logits.ar};
    Var mask = sample_edges(tape, blocks, edge_of, rows.group, static_cast<int>(batch.size()), temperature, rng);
    return reward_loss_from_mask(tape, rows, net, mask);
}

Var reward_loss(Tape& tape, std::span<const Trajectory* const> batch, RewardNet& net, const MaskSample& masks,
                double gamma)
{
    const int d_s = net.d_s(), d_a = net.d_a();
    RewardRows rows = stack_trajectories(batch, d_s, d_a, gamma);
    Tensor mask(rows.inputs.rows(), d_s + d_a);
    for (Eigen::Index r = 0; r < mask.rows(); ++r) {
        for (int i = 0; i < d_s; ++i) mask(r, i) = masks.sr(i);
        for (int k = 0; k < d_a; ++k) mask(r, d_s + k) = masks.ar(k);
    }
    return reward_loss_from_mask(tape, rows, net, tape.constant(std::move(mask)));
}

namespace {

struct DynRows {
    Tensor inputs;     // (N * d_s) x (d_s + d_a), row n * d_s + i
    Tensor targets;    // (N * d_s) x 1
    Tensor embedding;  // (N * d_s) x d_s one-hot of i (empty when disabled)
};

DynRows stack_transitions(std::span<const Transition> batch, const DynNet& net)
{
    if (batch.empty()) throw UsageError("dynamics_loss: empty batch");
    const int d_s = net.d_s(), d_a = net.d_a();
    const auto rows = static_cast<Eigen::Index>(batch.size()) * d_s;
    DynRows out;
    out.inputs.resize(rows, d_s + d_a);
    out.targets.resize(rows, 1);
    if (net.dim_embedding()) out.embedding = Tensor::Zero(rows, d_s);
    for (std::size_t n = 0; n < batch.size(); ++n) {
        const auto& tr = batch[n];
        if (tr.s.size() != d_s || tr.a.size() != d_a || tr.s_next.size() != d_s)
            throw ConfigError("dynamics_loss: transition width mismatch");
        for (int i = 0; i < d_s; ++i) {
            const auto r = static_cast<Eigen::Index>(n) * d_s + i;
            out.inputs.row(r).head(d_s) = tr.s.transpose();
            out.inputs.row(r).tail(d_a) = tr.a.transpose();
            out.targets(r, 0) = tr.s_next(i);
            if (net.dim_embedding()) out.embedding(r, i) = 1.0;
        }
    }
    return out;
}

Var dynamics_loss_from_mask(Tape& tape, const DynRows& rows, DynNet& net, Var mask, std::size_t n)
{
    Var x = ad::mul(tape.constant(rows.inputs), mask);
    if (net.dim_embedding()) {
        const Var parts[] = {x, tape.constant(rows.embedding)};
        x = ad::concat_cols(parts);
    }
    Var raw = net.mlp().forward(tape, x);
    Var nll = ad::mdn_nll(raw, rows.targets);
    return ad::scale(ad::sum(nll), 1.0 / static_cast<double>(n));
}

}  // namespace

Var dynamics_loss(Tape& tape, std::span<const Transition> batch, DynNet& net, const MaskLogitVars& logits,
                  double temperature, Rng& rng)
{
    const int d_s = net.d_s(), d_a = net.d_a();
    DynRows rows = stack_transitions(batch, net);
    // Row (n, i): column k < d_s reads ss edge k*d_s + i, column d_s + k
    // reads as edge k*d_s + i (offset past the d_s*d_s ss block).
    Eigen::MatrixXi edge_of(rows.inputs.rows(), d_s + d_a);
    std::vector<int> group(static_cast<std::size_t>(rows.inputs.rows()));
    for (std::size_t n = 0; n < batch.size(); ++n)
        for (int i = 0; i < d_s; ++i) {
            const auto r = static_cast<Eigen::Index>(n) * d_s + i;
            group[static_cast<std::size_t>(r)] = static_cast<int>(n);
            for (int k = 0; k < d_s; ++k) edge_of(r, k) = k * d_s + i;
            for (int k = 0; k < d_a; ++k) edge_of(r, d_s + k) = d_s * d_s + k * d_s + i;
        }
    const Var blocks[] = {logits.ss, logits.as};
    Var mask = sample_edges(tape, blocks, edge_of, group, static_cast<int>(batch.size()), temperature, rng);
    return dynamics_loss_from_mask(tape, rows, net, mask, batch.size());
}

Var dynamics_loss(Tape& tape, std::span<const Transition> batch, DynNet& net, const MaskSample& masks)
{
    const int d_s = net.d_s(), d_a = net.d_a();
    DynRows rows = stack_transitions(batch, net);
    Tensor mask(rows.inputs.rows(), d_s + d_a);
    for (Eigen::Index r = 0; r < mask.rows(); ++r) {
        const auto i = r % d_s;
        for (int k = 0; k < d_s; ++k) mask(r, k) = masks.ss(k, i);
        for (int k = 0; k < d_a; ++k) mask(r, d_s + k) = masks.as(k, i);
    }
    return dynamics_loss_from_mask(tape, rows, net, tape.constant(std::move(mask)), batch.size());
}

}  // namespace retdecomp
