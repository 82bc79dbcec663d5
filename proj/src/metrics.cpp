#include "retdecomp/metrics.hpp"

#include "retdecomp/errors.hpp"

#include <algorithm>
#include <cmath>

namespace retdecomp {

double sparsity_rate(const MaskVector& c_sr)
{
    if (c_sr.size() == 0) throw UsageError("sparsity_rate: empty mask");
    long ones = 0;
    for (Eigen::Index i = 0; i < c_sr.size(); ++i) {
        if (c_sr(i) != 0 && c_sr(i) != 1) throw UsageError("sparsity_rate: mask entries must be 0 or 1");
        ones += c_sr(i);
    }
    return static_cast<double>(ones) / static_cast<double>(c_sr.size());
}

// An empty prediction against an empty truth counts as perfect.
double Confusion::precision() const
{
    if (tp + fp == 0) return fn == 0 ? 1.0 : 0.0;
    return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double Confusion::recall() const
{
    if (tp + fn == 0) return fp == 0 ? 1.0 : 0.0;
    return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double Confusion::f1() const
{
    const double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

Confusion& Confusion::operator+=(const Confusion& o)
{
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
}

Confusion confusion(std::span<const double> probabilities, std::span<const int> truth, double threshold)
{
    if (probabilities.size() != truth.size()) throw UsageError("structure score: shape mismatch");
    Confusion c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool pred = probabilities[i] >= threshold;
        const bool real = truth[i] != 0;
        if (pred && real) ++c.tp;
        else if (pred) ++c.fp;
        else if (real) ++c.fn;
        else ++c.tn;
    }
    return c;
}

Confusion confusion(const Tensor& probabilities, const MaskMatrix& truth, double threshold)
{
    if (probabilities.rows() != truth.rows() || probabilities.cols() != truth.cols())
        throw UsageError("structure score: shape mismatch");
    return confusion(std::span<const double>(probabilities.data(), static_cast<std::size_t>(probabilities.size())),
                     std::span<const int>(truth.data(), static_cast<std::size_t>(truth.size())), threshold);
}

Confusion StructureScore::reward() const
{
    Confusion c = sr;
    c += ar;
    return c;
}

Confusion StructureScore::dynamics() const
{
    Confusion c = ss;
    c += as;
    return c;
}

Confusion StructureScore::total() const
{
    Confusion c = reward();
    c += dynamics();
    return c;
}

StructureScore structure_score(const EdgeProbabilities& p, const EnvSpec& truth, double threshold)
{
    StructureScore s;
    s.ss = confusion(p.ss, truth.mask_ss, threshold);
    s.as = confusion(p.as, truth.mask_as, threshold);
    if (p.sr.size() != truth.mask_sr.size() || p.ar.size() != truth.mask_ar.size())
        throw UsageError("structure score: shape mismatch");
    s.sr = confusion(std::span<const double>(p.sr.data(), static_cast<std::size_t>(p.sr.size())),
                     std::span<const int>(truth.mask_sr.data(), static_cast<std::size_t>(truth.mask_sr.size())),
                     threshold);
    s.ar = confusion(std::span<const double>(p.ar.data(), static_cast<std::size_t>(p.ar.size())),
                     std::span<const int>(truth.mask_ar.data(), static_cast<std::size_t>(truth.mask_ar.size())),
                     threshold);
    return s;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) throw UsageError("pearson: length mismatch");
    const std::size_t n = x.size();
    if (n < 2) return std::nullopt;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    // Relative cut so that a series constant up to rounding counts as constant.
    const double tiny = 1e-24 * static_cast<double>(n);
    if (sxx <= tiny * (1.0 + mx * mx) || syy <= tiny * (1.0 + my * my)) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<double> reward_correlation(FactoredEnv& env, const Policy& policy, const Relabeler& relabel,
                                         long n_steps)
{
    std::vector<double> proxy, oracle;
    while (static_cast<long>(oracle.size()) < n_steps) {
        Trajectory tr = rollout(env, policy);
        std::vector<double> r = relabel(tr);
        if (r.size() != tr.length()) throw UsageError("reward_correlation: relabeler returned the wrong length");
        proxy.insert(proxy.end(), r.begin(), r.end());
        oracle.insert(oracle.end(), tr.true_rewards.begin(), tr.true_rewards.end());
    }
    return pearson(proxy, oracle);
}

double average_return(FactoredEnv& env, const Policy& policy, int n)
{
    if (n <= 0) throw UsageError("average_return: need at least one rollout");
    const double gamma = env.spec().gamma;
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
        Trajectory tr = rollout(env, policy);
        double disc = 1.0;
        for (double r : tr.true_rewards) {
            total += disc * r;
            disc *= gamma;
        }
    }
    return total / n;
}

std::vector<double> ema(std::span<const double> values, int window)
{
    if (window < 1) throw UsageError("ema: window must be >= 1");
    const double alpha = 2.0 / (window + 1.0);
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) out.push_back(out.empty() ? v : alpha * v + (1.0 - alpha) * out.back());
    return out;
}

}  // namespace retdecomp
