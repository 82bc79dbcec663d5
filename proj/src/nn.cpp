#include "retdecomp/nn.hpp"

#include "retdecomp/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace retdecomp {

Mlp::Mlp(std::string name, std::vector<int> widths, Rng& rng) : widths_(std::move(widths))
{
    if (widths_.size() < 2) throw ConfigError("Mlp needs at least input and output widths");
    for (int w : widths_)
        if (w <= 0) throw ConfigError("Mlp widths must be positive");
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        const int in = widths_[l], out = widths_[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        Tensor w(in, out), b(1, out);
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
        for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.uniform(-bound, bound);
        weights_.emplace_back(name + ".w" + std::to_string(l), std::move(w));
        biases_.emplace_back(name + ".b" + std::to_string(l), std::move(b));
    }
}

void Mlp::check_input(Eigen::Index cols) const
{
    if (widths_.empty()) throw UsageError("Mlp used before construction");
    if (cols != widths_.front())
        throw ConfigError("Mlp input width " + std::to_string(cols) + " does not match first layer width " +
                          std::to_string(widths_.front()));
}

Var Mlp::forward(Tape& tape, Var input)
{
    check_input(input.cols());
    Var h = input;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        h = ad::add_row(ad::matmul(h, tape.parameter(weights_[l])), tape.parameter(biases_[l]));
        if (l + 1 < weights_.size()) h = ad::relu(h);
    }
    return h;
}

Var Mlp::forward_frozen(Tape& tape, Var input) const
{
    check_input(input.cols());
    Var h = input;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        h = ad::add_row(ad::matmul(h, tape.constant(weights_[l].value)), tape.constant(biases_[l].value));
        if (l + 1 < weights_.size()) h = ad::relu(h);
    }
    return h;
}

Tensor Mlp::infer(const Tensor& input) const
{
    check_input(input.cols());
    Tensor h = input;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Tensor next = h * weights_[l].value;
        next.rowwise() += biases_[l].value.row(0);
        if (l + 1 < weights_.size()) next = next.cwiseMax(0.0);
        h = std::move(next);
    }
    return h;
}

ParameterRefs Mlp::parameters()
{
    ParameterRefs refs;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        refs.push_back(&weights_[l]);
        refs.push_back(&biases_[l]);
    }
    return refs;
}

namespace {
double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
constexpr double kLog2Pi = 1.8378770664093453;  // ln(2 pi)
}  // namespace

MdnOutput decode_mdn(std::span<const double, kMdnOutputs> raw)
{
    MdnOutput out;
    double m = raw[0];
    for (int k = 1; k < kMixtureCores; ++k) m = std::max(m, raw[static_cast<std::size_t>(k)]);
    double z = 0.0;
    for (int k = 0; k < kMixtureCores; ++k) {
        out.weights[static_cast<std::size_t>(k)] = std::exp(raw[static_cast<std::size_t>(k)] - m);
        z += out.weights[static_cast<std::size_t>(k)];
    }
    for (int k = 0; k < kMixtureCores; ++k) {
        const auto i = static_cast<std::size_t>(k);
        out.weights[i] /= z;
        out.means[i] = raw[kMixtureCores + i];
        out.variances[i] = softplus(raw[2 * kMixtureCores + i]) + kVarianceFloor;
    }
    return out;
}

double mdn_nll(const MdnOutput& out, double target)
{
    double terms[kMixtureCores];
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < kMixtureCores; ++k) {
        const double var = out.variances[k];
        if (!(var > 0.0)) throw NumericError("mdn_nll: non-positive variance");
        const double d = target - out.means[k];
        terms[k] = std::log(out.weights[k]) - 0.5 * (kLog2Pi + std::log(var)) - 0.5 * d * d / var;
        m = std::max(m, terms[k]);
    }
    double s = 0.0;
    for (double t : terms) s += std::exp(t - m);
    return -(m + std::log(s));
}

double mdn_density(const MdnOutput& out, double x)
{
    double p = 0.0;
    for (std::size_t k = 0; k < kMixtureCores; ++k) {
        const double var = out.variances[k];
        const double d = x - out.means[k];
        p += out.weights[k] * std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * std::numbers::pi * var);
    }
    return p;
}

namespace ad {

Var mdn_nll(Var raw, const Tensor& target)
{
    if (raw.cols() != kMdnOutputs) throw ConfigError("mdn_nll: expected 9 raw outputs per row");
    if (target.rows() != raw.rows() || target.cols() != 1) throw ConfigError("mdn_nll: target must be R x 1");
    Tape& tape = *raw.tape;
    Var logits = slice_cols(raw, 0, kMixtureCores);
    Var means = slice_cols(raw, kMixtureCores, kMixtureCores);
    Var var = add_scalar(softplus(slice_cols(raw, 2 * kMixtureCores, kMixtureCores)), kVarianceFloor);
    Var log_w = sub_col(logits, logsumexp_rows(logits));
    Var t = tape.constant(target.col(0).replicate(1, kMixtureCores));
    Var resid = sub(t, means);
    // log N = -0.5 ln(2 pi) - 0.5 ln var - 0.5 resid^2 / var
    Var log_n = add_scalar(sub(scale(log(var), -0.5), scale(div(square(resid), var), 0.5)), -0.5 * kLog2Pi);
    return neg(logsumexp_rows(add(log_w, log_n)));
}

}  // namespace ad
}  // namespace retdecomp
