#pragma once

#include "retdecomp/causal_masks.hpp"
#include "retdecomp/factored_env.hpp"
#include "retdecomp/nn.hpp"

#include <span>

namespace retdecomp {

/// Reward network: r_hat = MLP([c_sr . s, c_ar . a]), widths in -> H -> H -> 1.
class RewardNet {
public:
    RewardNet() = default;
    RewardNet(int d_s, int d_a, int hidden, Rng& rng);

    int d_s() const { return d_s_; }
    int d_a() const { return d_a_; }
    Mlp& mlp() { return mlp_; }
    const Mlp& mlp() const { return mlp_; }

    double predict(const Vector& s, const Vector& a, const MaskVector& c_sr, const MaskVector& c_ar) const;
    /// Row-wise prediction for stacked states (R x d_s) and actions (R x d_a) -> R x 1.
    Tensor predict_batch(const Tensor& states, const Tensor& actions, const MaskVector& c_sr,
                         const MaskVector& c_ar) const;

private:
    int d_s_ = 0;
    int d_a_ = 0;
    Mlp mlp_;
};

/// Mixture density dynamics network, one set of weights shared by every
/// next-state dimension. Input for dimension i is
/// [C_ss(., i) . s, C_as(., i) . a], optionally followed by a one-hot code
/// of i so the shared head can tell the dimensions apart.
class DynNet {
public:
    DynNet() = default;
    DynNet(int d_s, int d_a, int hidden, bool dim_embedding, Rng& rng);

    int d_s() const { return d_s_; }
    int d_a() const { return d_a_; }
    bool dim_embedding() const { return dim_embedding_; }
    Mlp& mlp() { return mlp_; }
    const Mlp& mlp() const { return mlp_; }

    MdnOutput predict(const Vector& s, const Vector& a, const MaskMatrix& c_ss, const MaskMatrix& c_as, int dim) const;

private:
    int d_s_ = 0;
    int d_a_ = 0;
    bool dim_embedding_ = true;
    Mlp mlp_;
};

struct Transition {
    Vector s;
    Vector a;
    Vector s_next;
    double traj_return = 0.0;  // R of the source trajectory
    int traj_length = 0;
    bool last = false;         // t == T
};

/// Mean over trajectories of (R - sum_t gamma^(t-1) r_hat_t)^2 with one
/// Gumbel mask sample per trajectory.
Var reward_loss(Tape& tape, std::span<const Trajectory* const> batch, RewardNet& net, const MaskLogitVars& logits,
                double temperature, double gamma, Rng& rng);
/// Same loss under a fixed binary mask.
Var reward_loss(Tape& tape, std::span<const Trajectory* const> batch, RewardNet& net, const MaskSample& masks,
                double gamma);

/// Mean over transitions of -sum_i log P(s'_i | masked inputs), with one
/// Gumbel sample of C_ss / C_as per transition.
Var dynamics_loss(Tape& tape, std::span<const Transition> batch, DynNet& net, const MaskLogitVars& logits,
                  double temperature, Rng& rng);
Var dynamics_loss(Tape& tape, std::span<const Transition> batch, DynNet& net, const MaskSample& masks);

}  // namespace retdecomp
