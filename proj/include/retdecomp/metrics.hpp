#pragma once

#include "retdecomp/causal_masks.hpp"
#include "retdecomp/factored_env.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace retdecomp {

/// S_zr: fraction of ones in a binary reward mask.
double sparsity_rate(const MaskVector& c_sr);

struct Confusion {
    long tp = 0, fp = 0, fn = 0, tn = 0;

    double precision() const;
    double recall() const;
    double f1() const;
    long shd() const { return fp + fn; }
    Confusion& operator+=(const Confusion& o);
};

/// Predicted edge iff probability >= threshold.
Confusion confusion(std::span<const double> probabilities, std::span<const int> truth, double threshold = 0.5);
Confusion confusion(const Tensor& probabilities, const MaskMatrix& truth, double threshold = 0.5);

struct StructureScore {
    Confusion ss, as, sr, ar;

    Confusion reward() const;    // sr + ar
    Confusion dynamics() const;  // ss + as
    Confusion total() const;
};

StructureScore structure_score(const EdgeProbabilities& probabilities, const EnvSpec& truth, double threshold = 0.5);

/// Pearson correlation; nullopt when either series has zero variance or
/// fewer than two points.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Per-step proxy rewards for one finished trajectory.
using Relabeler = std::function<std::vector<double>(const Trajectory&)>;

/// Pearson r between relabelled and oracle rewards over on-policy
/// rollouts totalling at least `n_steps` steps.
std::optional<double> reward_correlation(FactoredEnv& env, const Policy& policy, const Relabeler& relabel,
                                         long n_steps);

/// Mean over `n` rollouts of sum_t gamma^(t-1) r_t (oracle rewards).
double average_return(FactoredEnv& env, const Policy& policy, int n);

/// Exponential moving average with decay 2 / (window + 1).
std::vector<double> ema(std::span<const double> values, int window = 10);

}  // namespace retdecomp
