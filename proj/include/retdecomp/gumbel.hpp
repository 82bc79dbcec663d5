#pragma once

#include "retdecomp/rng.hpp"

#include <array>

namespace retdecomp {

/// One two-way Gumbel-Softmax draw. Index 0 is "edge present".
struct GumbelSample {
    std::array<double, 2> soft{};
    int hard_index = 0;

    double hard_value() const { return hard_index == 0 ? 1.0 : 0.0; }
    /// d soft[0] / d logit0 (= -d soft[0] / d logit1).
    double soft_slope(double temperature) const { return soft[0] * soft[1] / temperature; }
};

/// softmax((logits + g) / tau) with g ~ Gumbel(0,1); hard = argmax, ties to 0.
GumbelSample gumbel_softmax(double logit0, double logit1, double temperature, Rng& rng);
GumbelSample gumbel_softmax_with_noise(double logit0, double logit1, double noise0, double noise1,
                                       double temperature);

}  // namespace retdecomp
