#pragma once

#include "retdecomp/rng.hpp"
#include "retdecomp/tensor.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace retdecomp {

enum class DynamicsKind { Linear, RandomMlp };
enum class ObserveMode { Dense, Episodic, EveryK };

std::string to_string(DynamicsKind k);
std::string to_string(ObserveMode m);
DynamicsKind parse_dynamics_kind(const std::string& s);
ObserveMode parse_observe_mode(const std::string& s);

/// Hidden-layer width of each per-dimension "random-mlp" generator.
inline constexpr int kGeneratorHidden = 16;

/// Generator for one next-state dimension under the random-mlp kind:
/// out = w_out . tanh(W_in^T x + b_in) + b_out with x = masked (s, a).
struct MlpGenerator {
    Tensor w_in;   // (d_s + d_a) x 16
    Vector b_in;   // 16
    Vector w_out;  // 16
    double b_out = 0.0;
};

/// A synthetic factored MDP with known causal structure.
///
/// Mask conventions: mask_ss(i, j) = 1 iff state dim i at t is a parent of
/// state dim j at t+1; mask_as(k, j) likewise for action dim k; mask_sr(i)
/// and mask_ar(k) mark the parents of the reward.
struct EnvSpec {
    int d_s = 0;
    int d_a = 0;
    MaskMatrix mask_ss;
    MaskMatrix mask_as;
    MaskVector mask_sr;
    MaskVector mask_ar;

    DynamicsKind dynamics_kind = DynamicsKind::Linear;
    // Linear generator: s'_j = sum_i m_ss(i,j) w_ss(i,j) s_i + sum_k m_as(k,j) w_as(k,j) a_k + bias_j
    Tensor w_ss;
    Tensor w_as;
    Vector bias;
    // Random-mlp generator, one per next-state dimension.
    std::vector<MlpGenerator> generators;

    // Reward: sum_i m_sr(i) w_sr(i) s_i - action_cost * sum_k m_ar(k) a_k^2 + reward_bias
    Vector w_sr;
    double action_cost = 0.1;
    double reward_bias = 0.0;

    double noise_std_state = 0.0;
    double noise_std_reward = 0.0;
    double init_state_std = 1.0;
    int horizon = 64;
    ObserveMode observe_mode = ObserveMode::Episodic;
    int observe_k = 1;
    double gamma = 1.0;

    /// Throws ConfigError when shapes, ranges or the reward-parent invariant are violated.
    void validate() const;
    bool operator==(const EnvSpec& other) const;
};

struct GenerateOptions {
    int d_s = 6;
    int d_a = 2;
    double edge_density = 0.3;
    DynamicsKind kind = DynamicsKind::Linear;
    std::uint64_t seed = 0;
    /// Quadratic action cost on every action dim (mask_ar forced to all ones).
    /// When false mask_ar is drawn like the other masks.
    bool action_cost_all_dims = true;
    double action_cost = 0.1;
    double noise_std_state = 0.0;
    double noise_std_reward = 0.0;
    int horizon = 64;
    ObserveMode observe_mode = ObserveMode::Episodic;
    int observe_k = 1;
    double gamma = 1.0;
};

/// Draws a spec: each mask entry ~ Bernoulli(edge_density), redrawn until at
/// least one state dim feeds the reward (bounded retries, then ConfigError).
EnvSpec generate_spec(const GenerateOptions& opts);

/// "chain-k": dim 0 is driven by action 0 alone, dim i+1 by dim i and
/// action 0; only dim k-1
/// feeds the reward. Its compact representation is known in closed form.
EnvSpec chain_spec(int k, double noise_std_state = 0.0);

/// Episodic env with 6 state dims of which exactly 2 feed the reward; the
/// other four are noisy distractors that never reach the reward.
EnvSpec distractor_spec(std::uint64_t seed = 0);

/// Noise-free mean of the next state, f(C . s, C . a).
Vector transition_mean(const EnvSpec& spec, const Vector& state, const Vector& action);
/// Noise-free mean reward g(c . s, c . a).
double oracle_reward(const EnvSpec& spec, const Vector& state, const Vector& action);

struct StepResult {
    Vector next_state;
    double observed_reward = 0.0;
    bool done = false;
};

/// Stateful simulator. Noise (initial state, transitions, reward) comes from
/// a private stream seeded at construction.
class FactoredEnv {
public:
    FactoredEnv(EnvSpec spec, std::uint64_t seed);

    const EnvSpec& spec() const { return spec_; }
    Vector reset();
    StepResult step(const Vector& action);

    const Vector& state() const { return state_; }
    /// 1-based index of the next step to take; equals horizon + 1 when done.
    int t() const { return t_; }
    bool done() const { return t_ > spec_.horizon; }
    /// Realised (noisy) reward r_t of the last step; oracle-only.
    double last_true_reward() const { return last_reward_; }

private:
    EnvSpec spec_;
    Rng rng_;
    Vector state_;
    int t_ = 1;
    double pending_ = 0.0;  // discounted true reward not yet emitted as o_t
    double last_reward_ = 0.0;
    bool started_ = false;
};

/// One episode. states has horizon + 1 entries; true_rewards is excluded from
/// every learner-facing view.
struct Trajectory {
    std::vector<Vector> states;
    std::vector<Vector> actions;
    std::vector<double> observed;
    std::vector<double> true_rewards;
    double ret = 0.0;  // sum_t gamma^(t-1) o_t

    std::size_t length() const { return actions.size(); }
};

using Policy = std::function<Vector(const Vector& state)>;

/// Resets `env` and runs a full episode. Actions are clipped to [-1, 1] by
/// the environment; a non-finite action raises NumericError.
Trajectory rollout(FactoredEnv& env, const Policy& policy);

/// Uniform [-1, 1]^d_a policy drawing from `rng`.
Policy uniform_random_policy(int d_a, Rng& rng);

}  // namespace retdecomp
