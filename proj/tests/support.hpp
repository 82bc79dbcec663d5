#pragma once

// Shared oracles for the unit and acceptance tests.

#include "retdecomp/autodiff.hpp"
#include "retdecomp/causal_masks.hpp"
#include "retdecomp/config.hpp"
#include "retdecomp/gen_model.hpp"
#include "retdecomp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace rdtest {

using namespace retdecomp;

/// Relative error with a floor so that entries whose true gradient is ~0
/// are judged on absolute error.
inline double rel_error(double analytic, double numeric)
{
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-3});
}

struct GradReport {
    double worst = 0.0;
    long entries = 0;
};

/// Central finite differences (step h) on every entry of every parameter,
/// compared against the tape gradient of `loss`.
inline GradReport check_gradients(const ParameterRefs& params, const std::function<Var(Tape&)>& loss, double h = 1e-5)
{
    for (auto* p : params) p->zero_grad();
    {
        Tape tape;
        tape.backward(loss(tape));
    }
    GradReport rep;
    for (auto* p : params) {
        for (Eigen::Index i = 0; i < p->value.size(); ++i) {
            const double keep = p->value.data()[i];
            p->value.data()[i] = keep + h;
            double up, down;
            {
                Tape t;
                up = loss(t).scalar();
            }
            p->value.data()[i] = keep - h;
            {
                Tape t;
                down = loss(t).scalar();
            }
            p->value.data()[i] = keep;
            const double numeric = (up - down) / (2 * h);
            rep.worst = std::max(rep.worst, rel_error(p->grad.data()[i], numeric));
            ++rep.entries;
        }
    }
    return rep;
}

inline Tensor random_tensor(Eigen::Index r, Eigen::Index c, Rng& rng, double lo = -1.0, double hi = 1.0)
{
    Tensor t(r, c);
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(lo, hi);
    return t;
}

/// Entries bounded away from zero (for kinks at 0) with random sign.
inline Tensor away_from_zero(Eigen::Index r, Eigen::Index c, Rng& rng, double margin = 0.05)
{
    Tensor t(r, c);
    for (Eigen::Index i = 0; i < t.size(); ++i)
        t.data()[i] = (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(margin, 1.0);
    return t;
}

/// Compact representation by explicit graph search, independent of the
/// library: one_step collects reward parents and their parents; fixed_point
/// runs BFS backwards from the reward parents.
inline MaskVector compact_oracle(const MaskMatrix& ss, const MaskVector& sr, bool fixed_point)
{
    const int d = static_cast<int>(sr.size());
    MaskVector keep = MaskVector::Zero(d);
    std::vector<int> queue;
    for (int j = 0; j < d; ++j)
        if (sr(j)) {
            keep(j) = 1;
            queue.push_back(j);
        }
    if (!fixed_point) {
        for (int j : std::vector<int>(queue))
            for (int i = 0; i < d; ++i)
                if (ss(i, j)) keep(i) = 1;
        return keep;
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int j = queue[head];
        for (int i = 0; i < d; ++i)
            if (ss(i, j) && !keep(i)) {
                keep(i) = 1;
                queue.push_back(i);
            }
    }
    return keep;
}

/// Desk preset shrunk so a full run takes well under a second.
inline RunConfig tiny_config(std::uint64_t seed = 0)
{
    RunConfig c = RunConfig::preset("desk");
    c.seed = seed;
    c.env_horizon = 16;
    c.cycles = 3;
    c.iterations = 2;
    c.steps_per_iteration = 32;
    c.warmup = 64;
    c.model_hidden = 16;
    c.sac.hidden = 16;
    c.transition_batch = 32;
    c.trajectory_batch = 4;
    c.eval_rollouts = 2;
    c.update_ratio = 0.5;
    return c;
}

/// Every step of one trajectory as a transition.
inline std::vector<Transition> transitions_of(const Trajectory& tr)
{
    std::vector<Transition> out;
    for (std::size_t t = 0; t < tr.length(); ++t)
        out.push_back({tr.states[t], tr.actions[t], tr.states[t + 1], tr.ret, static_cast<int>(tr.length()),
                       t + 1 == tr.length()});
    return out;
}

}  // namespace rdtest
