#pragma once

#include "retdecomp/autodiff.hpp"
#include "retdecomp/rng.hpp"

#include <array>
#include <string>
#include <span>
#include <vector>

namespace retdecomp {

/// Stacked fully-connected network, ReLU after every hidden layer and a
/// linear output layer. Weights are stored input-major (in x out) so a batch
/// of row vectors maps as X W + b.
class Mlp {
public:
    Mlp() = default;
    /// `widths` = {input, hidden..., output}; weights drawn U(-1/sqrt(in), 1/sqrt(in)).
    Mlp(std::string name, std::vector<int> widths, Rng& rng);

    const std::vector<int>& widths() const { return widths_; }
    int input_width() const { return widths_.front(); }
    int output_width() const { return widths_.back(); }
    std::size_t layer_count() const { return weights_.size(); }

    /// Records the forward pass; gradients flow into the parameters.
    Var forward(Tape& tape, Var input);
    /// Records the forward pass with the parameters as constants.
    Var forward_frozen(Tape& tape, Var input) const;
    /// Plain evaluation without a tape.
    Tensor infer(const Tensor& input) const;

    ParameterRefs parameters();
    Parameter& weight(std::size_t layer) { return weights_[layer]; }
    Parameter& bias(std::size_t layer) { return biases_[layer]; }
    const Parameter& weight(std::size_t layer) const { return weights_[layer]; }
    const Parameter& bias(std::size_t layer) const { return biases_[layer]; }

private:
    void check_input(Eigen::Index cols) const;

    std::vector<int> widths_;
    std::vector<Parameter> weights_;
    std::vector<Parameter> biases_;
};

/// Number of Gaussian cores in the mixture density head.
inline constexpr int kMixtureCores = 3;
/// Raw outputs per predicted scalar: (weight logit, mean, raw scale) per core.
inline constexpr int kMdnOutputs = 3 * kMixtureCores;
inline constexpr double kVarianceFloor = 1e-4;

/// Decoded mixture parameters for one predicted scalar.
struct MdnOutput {
    std::array<double, kMixtureCores> weights{};
    std::array<double, kMixtureCores> means{};
    std::array<double, kMixtureCores> variances{};
};

/// Decodes 9 raw outputs: softmax weights, identity means, softplus + floor variances.
MdnOutput decode_mdn(std::span<const double, kMdnOutputs> raw);
/// -log sum_k w_k N(target; mu_k, var_k)
double mdn_nll(const MdnOutput& out, double target);
double mdn_density(const MdnOutput& out, double x);

namespace ad {
/// Per-row mixture negative log-likelihood; raw is R x 9, target R x 1 -> R x 1.
Var mdn_nll(Var raw, const Tensor& target);
}  // namespace ad

}  // namespace retdecomp
