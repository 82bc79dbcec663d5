#pragma once

#include "retdecomp/adam.hpp"
#include "retdecomp/nn.hpp"

#include <vector>

namespace retdecomp {

enum class ActMode { Stochastic, Mean };

/// Tanh-squashed Gaussian actor. The network maps a (masked) state to
/// [mean | log std]; log std is clamped to [-20, 2].
class Actor {
public:
    Actor() = default;
    Actor(int d_s, int d_a, int hidden, Rng& rng);

    int d_s() const { return d_s_; }
    int d_a() const { return d_a_; }
    Mlp& mlp() { return mlp_; }
    const Mlp& mlp() const { return mlp_; }

    Vector act(const Vector& state, ActMode mode, Rng& rng) const;

    struct Sample {
        Var action;    // B x d_a, in (-1, 1)
        Var log_prob;  // B x 1
    };
    /// Reparameterised sample a = tanh(mu + sigma * eps) for the noise `eps`
    /// (B x d_a). With `trainable` false the actor weights enter as constants.
    Sample sample(Tape& tape, const Tensor& states, const Tensor& eps, bool trainable);

private:
    int d_s_ = 0;
    int d_a_ = 0;
    Mlp mlp_;
};

/// Q(s, a) on [s, a]. One head by default; with two heads the value used
/// for targets and the actor is the elementwise minimum.
class Critic {
public:
    Critic() = default;
    Critic(int d_s, int d_a, int hidden, bool twin, Rng& rng);

    bool twin() const { return heads_.size() == 2; }
    std::vector<Mlp>& heads() { return heads_; }
    const std::vector<Mlp>& heads() const { return heads_; }
    ParameterRefs parameters();

    /// min over heads, values only.
    Tensor value(const Tensor& states, const Tensor& actions) const;
    /// min over heads with the weights frozen; gradients reach `actions` only.
    Var value_frozen(Tape& tape, const Tensor& states, Var actions) const;

private:
    std::vector<Mlp> heads_;
};

/// Entropy temperature alpha = exp(log_alpha).
struct Temperature {
    Parameter log_alpha;
    double target_entropy = 0.0;

    double alpha() const { return std::exp(log_alpha.value(0, 0)); }
    static Temperature make(double initial_alpha, double target_entropy);
};

/// Policy-side minibatch. States are whatever the policy consumes (the
/// compact state for grd, the full state otherwise).
struct SacBatch {
    Tensor states;       // B x d_s
    Tensor actions;      // B x d_a
    Tensor rewards;      // B x 1, relabelled; must be filled in
    Tensor next_states;  // B x d_s
    Tensor done;         // B x 1, 1 where the target must not bootstrap
};

struct SacConfig {
    int hidden = 64;
    double gamma = 0.99;
    double polyak = 0.0005;
    double lr = 3e-4;
    double initial_alpha = 1.0;
    bool twin_critic = false;
    /// Time-limit semantics: the horizon step still bootstraps. Set to treat
    /// the final step as terminal instead.
    bool terminal_at_horizon = false;
};

/// y = r + gamma * (1 - done) * (Q_target(s', a') - alpha log pi(a'|s')),
/// loss = mean (Q(s, a) - y)^2, summed over critic heads. One Adam step.
double critic_update(const SacBatch& batch, Critic& critic, const Critic& target, Actor& actor, double alpha,
                     double gamma, Adam& opt, Rng& rng);
/// loss = mean(alpha log pi(a|s) - Q(s, a)), a reparameterised. One Adam step.
double actor_update(const SacBatch& batch, Actor& actor, const Critic& critic, double alpha, Adam& opt, Rng& rng);
/// loss = mean(-alpha (log pi(a|s) + target_entropy)), gradient on log alpha.
double temperature_update(const SacBatch& batch, Actor& actor, Temperature& temp, Adam& opt, Rng& rng);
/// target <- (1 - rho) target + rho online
void polyak_update(Critic& target, const Critic& online, double rho);

struct SacLosses {
    double critic = 0.0;
    double actor = 0.0;
    double temperature = 0.0;
};

class SacAgent {
public:
    SacAgent(int d_s, int d_a, const SacConfig& config, Rng& init_rng);
    SacAgent(const SacAgent&) = delete;
    SacAgent& operator=(const SacAgent&) = delete;

    const SacConfig& config() const { return config_; }
    Actor& actor() { return actor_; }
    const Actor& actor() const { return actor_; }
    Critic& critic() { return critic_; }
    Critic& target_critic() { return target_; }
    Temperature& temperature() { return temp_; }
    const Temperature& temperature() const { return temp_; }

    SacLosses update(const SacBatch& batch, Rng& rng);

private:
    SacConfig config_;
    Actor actor_;
    Critic critic_;
    Critic target_;
    Temperature temp_;
    Adam actor_opt_;
    Adam critic_opt_;
    Adam temp_opt_;
};

}  // namespace retdecomp
