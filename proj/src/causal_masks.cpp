#include "retdecomp/causal_masks.hpp"

#include "retdecomp/errors.hpp"
#include "retdecomp/gumbel.hpp"

#include <cmath>

namespace retdecomp {

MaskLogits MaskLogits::zeros(int d_s, int d_a)
{
    if (d_s < 1 || d_a < 1) throw ConfigError("mask logits: dimensions must be >= 1");
    MaskLogits l;
    l.d_s = d_s;
    l.d_a = d_a;
    l.ss = Parameter("cau.ss", Tensor::Zero(d_s * d_s, 2));
    l.as = Parameter("cau.as", Tensor::Zero(d_a * d_s, 2));
    l.sr = Parameter("cau.sr", Tensor::Zero(d_s, 2));
    l.ar = Parameter("cau.ar", Tensor::Zero(d_a, 2));
    return l;
}

bool MaskLogits::all_finite() const
{
    return ss.value.allFinite() && as.value.allFinite() && sr.value.allFinite() && ar.value.allFinite();
}

MaskSample MaskSample::ones(int d_s, int d_a)
{
    MaskSample m;
    m.ss = MaskMatrix::Ones(d_s, d_s);
    m.as = MaskMatrix::Ones(d_a, d_s);
    m.sr = MaskVector::Ones(d_s);
    m.ar = MaskVector::Ones(d_a);
    return m;
}

double edge_probability(double psi0, double psi1)
{
    const double z = psi1 - psi0;
    if (z >= 0) {
        const double e = std::exp(-z);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
}

EdgeProbabilities edge_probabilities(const MaskLogits& l)
{
    EdgeProbabilities p;
    p.ss.resize(l.d_s, l.d_s);
    p.as.resize(l.d_a, l.d_s);
    p.sr.resize(l.d_s);
    p.ar.resize(l.d_a);
    for (int i = 0; i < l.d_s; ++i)
        for (int j = 0; j < l.d_s; ++j) {
            const auto r = i * l.d_s + j;
            p.ss(i, j) = edge_probability(l.ss.value(r, 0), l.ss.value(r, 1));
        }
    for (int k = 0; k < l.d_a; ++k)
        for (int j = 0; j < l.d_s; ++j) {
            const auto r = k * l.d_s + j;
            p.as(k, j) = edge_probability(l.as.value(r, 0), l.as.value(r, 1));
        }
    for (int i = 0; i < l.d_s; ++i) p.sr(i) = edge_probability(l.sr.value(i, 0), l.sr.value(i, 1));
    for (int k = 0; k < l.d_a; ++k) p.ar(k) = edge_probability(l.ar.value(k, 0), l.ar.value(k, 1));
    return p;
}

MaskSample sample_deterministic(const MaskLogits& l)
{
    auto greedy = [](const Tensor& psi, Eigen::Index r) { return psi(r, 0) >= psi(r, 1) ? 1 : 0; };
    MaskSample m;
    m.mode = SampleMode::Deterministic;
    m.ss.resize(l.d_s, l.d_s);
    m.as.resize(l.d_a, l.d_s);
    m.sr.resize(l.d_s);
    m.ar.resize(l.d_a);
    for (int i = 0; i < l.d_s; ++i)
        for (int j = 0; j < l.d_s; ++j) m.ss(i, j) = greedy(l.ss.value, i * l.d_s + j);
    for (int k = 0; k < l.d_a; ++k)
        for (int j = 0; j < l.d_s; ++j) m.as(k, j) = greedy(l.as.value, k * l.d_s + j);
    for (int i = 0; i < l.d_s; ++i) m.sr(i) = greedy(l.sr.value, i);
    for (int k = 0; k < l.d_a; ++k) m.ar(k) = greedy(l.ar.value, k);
    return m;
}

MaskSample sample_training(const MaskLogits& l, double temperature, Rng& rng)
{
    auto draw = [&](const Tensor& psi, Eigen::Index r) {
        return gumbel_softmax(psi(r, 0), psi(r, 1), temperature, rng).hard_index == 0 ? 1 : 0;
    };
    MaskSample m;
    m.mode = SampleMode::Stochastic;
    m.ss.resize(l.d_s, l.d_s);
    m.as.resize(l.d_a, l.d_s);
    m.sr.resize(l.d_s);
    m.ar.resize(l.d_a);
    for (int i = 0; i < l.d_s; ++i)
        for (int j = 0; j < l.d_s; ++j) m.ss(i, j) = draw(l.ss.value, i * l.d_s + j);
    for (int k = 0; k < l.d_a; ++k)
        for (int j = 0; j < l.d_s; ++j) m.as(k, j) = draw(l.as.value, k * l.d_s + j);
    for (int i = 0; i < l.d_s; ++i) m.sr(i) = draw(l.sr.value, i);
    for (int k = 0; k < l.d_a; ++k) m.ar(k) = draw(l.ar.value, k);
    return m;
}

MaskLogitVars bind_logits(Tape& tape, MaskLogits& l)
{
    return {tape.parameter(l.ss), tape.parameter(l.as), tape.parameter(l.sr), tape.parameter(l.ar)};
}

Var sample_edges(Tape& tape, std::span<const Var> blocks, const Eigen::MatrixXi& edge_of,
                 std::span<const int> group_of_row, int groups, double temperature, Rng& rng)
{
    if (!(temperature > 0.0)) throw ConfigError("sample_edges: temperature must be positive");
    if (static_cast<Eigen::Index>(group_of_row.size()) != edge_of.rows())
        throw ConfigError("sample_edges: one group id per row required");
    std::vector<int> block_of;
    std::vector<int> row_in_block;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (blocks[b].cols() != 2) throw ConfigError("sample_edges: logit blocks must be E x 2");
        for (Eigen::Index r = 0; r < blocks[b].rows(); ++r) {
            block_of.push_back(static_cast<int>(b));
            row_in_block.push_back(static_cast<int>(r));
        }
    }
    const int edges = static_cast<int>(block_of.size());

    // Per (group, edge) draw, in a fixed order.
    std::vector<GumbelSample> draws(static_cast<std::size_t>(groups) * static_cast<std::size_t>(edges));
    for (int g = 0; g < groups; ++g)
        for (int e = 0; e < edges; ++e) {
            const Tensor& psi = blocks[static_cast<std::size_t>(block_of[static_cast<std::size_t>(e)])].value();
            const auto r = row_in_block[static_cast<std::size_t>(e)];
            draws[static_cast<std::size_t>(g) * edges + e] = gumbel_softmax(psi(r, 0), psi(r, 1), temperature, rng);
        }

    const auto R = edge_of.rows(), K = edge_of.cols();
    Tensor hard(R, K);
    Tensor slope(R, K);
    for (Eigen::Index r = 0; r < R; ++r) {
        const int g = group_of_row[static_cast<std::size_t>(r)];
        if (g < 0 || g >= groups) throw ConfigError("sample_edges: group id out of range");
        for (Eigen::Index k = 0; k < K; ++k) {
            const int e = edge_of(r, k);
            if (e < 0 || e >= edges) throw ConfigError("sample_edges: edge id out of range");
            const auto& d = draws[static_cast<std::size_t>(g) * edges + e];
            hard(r, k) = d.hard_value();
            slope(r, k) = d.soft_slope(temperature);
        }
    }

    std::vector<Var> parents(blocks.begin(), blocks.end());
    return tape.record(std::move(hard), blocks,
                       [parents, edge_of, slope, block_of, row_in_block](Tape& t, const Tensor&, const Tensor& g) {
                           std::vector<Tensor> grads;
                           for (const auto& p : parents) grads.push_back(Tensor::Zero(p.rows(), 2));
                           for (Eigen::Index r = 0; r < edge_of.rows(); ++r)
                               for (Eigen::Index k = 0; k < edge_of.cols(); ++k) {
                                   const auto e = static_cast<std::size_t>(edge_of(r, k));
                                   const double d = g(r, k) * slope(r, k);
                                   auto& gb = grads[static_cast<std::size_t>(block_of[e])];
                                   gb(row_in_block[e], 0) += d;
                                   gb(row_in_block[e], 1) -= d;
                               }
                           for (std::size_t b = 0; b < parents.size(); ++b)
                               if (t.requires_grad(parents[b])) t.accumulate(parents[b].id, grads[b]);
                       });
}

TrainingMaskVars sample_training(Tape& tape, const MaskLogitVars& l, int d_s, int d_a, double temperature, Rng& rng)
{
    // Each block is laid out as its mask; one noise group, so every edge is drawn once.
    auto draw = [&](Var block, int rows, int cols) {
        Eigen::MatrixXi edge_of(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) edge_of(r, c) = r * cols + c;
        const std::vector<int> group(static_cast<std::size_t>(rows), 0);
        const Var blocks[] = {block};
        return sample_edges(tape, blocks, edge_of, group, 1, temperature, rng);
    };
    TrainingMaskVars out;
    out.ss = draw(l.ss, d_s, d_s);
    out.as = draw(l.as, d_a, d_s);
    out.sr = draw(l.sr, 1, d_s);
    out.ar = draw(l.ar, 1, d_a);
    return out;
}

namespace {

/// lambda-weighted sum of log clamp(P) over one block; `weights` is E x 1.
Var weighted_log_probability(Tape& tape, Var block, const Tensor& weights)
{
    Var diff = ad::sub(ad::slice_cols(block, 0, 1), ad::slice_cols(block, 1, 1));
    Var p = ad::clamp(ad::sigmoid(diff), kProbabilityClamp, 1.0 - kProbabilityClamp);
    return ad::sum(ad::mul(ad::log(p), tape.constant(weights)));
}

}  // namespace

Var sparsity_loss(Tape& tape, const MaskLogitVars& l, int d_s, const SparsityWeights& w)
{
    const auto d_a = l.ar.rows();
    Tensor w_ss(d_s * d_s, 1);
    for (int i = 0; i < d_s; ++i)
        for (int j = 0; j < d_s; ++j) w_ss(i * d_s + j, 0) = i == j ? w.state_self : w.state_cross;
    Var total = weighted_log_probability(tape, l.sr, Tensor::Constant(d_s, 1, w.state_reward));
    total = ad::add(total, weighted_log_probability(tape, l.ar, Tensor::Constant(d_a, 1, w.action_reward)));
    total = ad::add(total, weighted_log_probability(tape, l.ss, w_ss));
    total = ad::add(total, weighted_log_probability(tape, l.as, Tensor::Constant(d_a * d_s, 1, w.action_state)));
    return total;
}

double sparsity_loss(const MaskLogits& logits, const SparsityWeights& weights)
{
    Tape tape;
    MaskLogitVars l{tape.constant(logits.ss.value), tape.constant(logits.as.value), tape.constant(logits.sr.value),
                    tape.constant(logits.ar.value)};
    return sparsity_loss(tape, l, logits.d_s, weights).scalar();
}

MaskVector compact_representation(const MaskMatrix& ss, const MaskVector& sr, Closure closure)
{
    const auto d = sr.size();
    if (ss.rows() != d || ss.cols() != d) throw ConfigError("compact_representation: C_ss must be d_s x d_s");
    MaskVector keep = sr;
    MaskVector frontier = sr;
    for (Eigen::Index iter = 0; iter < d; ++iter) {
        MaskVector next = keep;
        for (Eigen::Index j = 0; j < d; ++j) {
            if (!frontier(j)) continue;
            for (Eigen::Index i = 0; i < d; ++i)
                if (ss(i, j)) next(i) = 1;
        }
        if (closure == Closure::OneStep) return next;
        if (next == keep) break;
        frontier = next;
        keep = next;
    }
    return keep;
}

}  // namespace retdecomp
