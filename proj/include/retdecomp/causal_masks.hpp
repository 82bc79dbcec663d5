#pragma once

#include "retdecomp/autodiff.hpp"
#include "retdecomp/rng.hpp"
#include "retdecomp/tensor.hpp"

#include <span>
#include <vector>

namespace retdecomp {

/// Free Bernoulli parameters, one (psi0, psi1) row per candidate edge.
/// psi0 scores "edge present", psi1 "edge absent".
///
/// Row layout: ss row i*d_s + j is the edge state i -> next-state j;
/// as row k*d_s + j is action k -> next-state j; sr row i and ar row k are
/// state i -> reward and action k -> reward.
struct MaskLogits {
    int d_s = 0;
    int d_a = 0;
    Parameter ss;
    Parameter as;
    Parameter sr;
    Parameter ar;

    /// All logits zero: every edge starts at probability 0.5.
    static MaskLogits zeros(int d_s, int d_a);
    ParameterRefs parameters() { return {&ss, &as, &sr, &ar}; }
    bool all_finite() const;
};

/// Edge probabilities, laid out like the masks they describe.
struct EdgeProbabilities {
    Tensor ss;  // d_s x d_s
    Tensor as;  // d_a x d_s
    Vector sr;  // d_s
    Vector ar;  // d_a
};

enum class SampleMode { Stochastic, Deterministic };

struct MaskSample {
    MaskMatrix ss;  // C^{s->s}
    MaskMatrix as;  // C^{a->s}
    MaskVector sr;  // c^{s->r}
    MaskVector ar;  // c^{a->r}
    SampleMode mode = SampleMode::Deterministic;

    static MaskSample ones(int d_s, int d_a);
};

/// exp(psi0) / (exp(psi0) + exp(psi1))
double edge_probability(double psi0, double psi1);
EdgeProbabilities edge_probabilities(const MaskLogits& logits);

/// Greedy mask: edge present iff psi0 >= psi1.
MaskSample sample_deterministic(const MaskLogits& logits);
/// One stochastic binary draw of every edge (values only).
MaskSample sample_training(const MaskLogits& logits, double temperature, Rng& rng);

/// Tape view of the four logit blocks.
struct MaskLogitVars {
    Var ss, as, sr, ar;
};
MaskLogitVars bind_logits(Tape& tape, MaskLogits& logits);

/// Gradient-carrying Gumbel-Softmax sample of the edges named by `edge_of`,
/// an R x K table of edge ids over the concatenated rows of `blocks`.
/// Row r uses noise group `group_of_row[r]`; each group draws every edge
/// once, so rows sharing a group see the same mask. The result holds the
/// hard 0/1 values; gradients reach the logits through the soft relaxation
/// (straight-through).
Var sample_edges(Tape& tape, std::span<const Var> blocks, const Eigen::MatrixXi& edge_of,
                 std::span<const int> group_of_row, int groups, double temperature, Rng& rng);

/// One gradient-carrying sample of every mask (single noise group).
struct TrainingMaskVars {
    Var ss;  // d_s x d_s
    Var as;  // d_a x d_s
    Var sr;  // 1 x d_s
    Var ar;  // 1 x d_a
};
TrainingMaskVars sample_training(Tape& tape, const MaskLogitVars& logits, int d_s, int d_a, double temperature,
                                 Rng& rng);

struct SparsityWeights {
    double state_reward = 0.0;    // lambda1, c^{s->r}
    double action_reward = 0.0;   // lambda2, c^{a->r}
    double state_cross = 0.0;     // lambda3, C^{s->s} off-diagonal
    double state_self = 0.0;      // lambda4, C^{s->s} diagonal
    double action_state = 0.0;    // lambda5, C^{a->s}
};

/// Probabilities are clamped to [1e-6, 1 - 1e-6] before the logarithm.
inline constexpr double kProbabilityClamp = 1e-6;

/// sum over edges of lambda * log P(edge), grouped by mask family.
Var sparsity_loss(Tape& tape, const MaskLogitVars& logits, int d_s, const SparsityWeights& weights);
double sparsity_loss(const MaskLogits& logits, const SparsityWeights& weights);

enum class Closure { OneStep, FixedPoint };

/// State dims kept in the compact representation. OneStep: the direct
/// reward parents plus every parent of a direct reward parent. FixedPoint:
/// the same union iterated to its fixed point (backward reachability).
MaskVector compact_representation(const MaskMatrix& ss, const MaskVector& sr, Closure closure);

}  // namespace retdecomp
