#include "retdecomp/gumbel.hpp"

#include "retdecomp/errors.hpp"

#include <cmath>

namespace retdecomp {

GumbelSample gumbel_softmax_with_noise(double logit0, double logit1, double noise0, double noise1,
                                       double temperature)
{
    if (!(temperature > 0.0)) throw ConfigError("gumbel_softmax: temperature must be positive");
    const double z = ((logit1 + noise1) - (logit0 + noise0)) / temperature;
    GumbelSample s;
    // Two-way softmax written as a logistic for stability.
    if (z >= 0.0) {
        const double e = std::exp(-z);
        s.soft[0] = e / (1.0 + e);
        s.soft[1] = 1.0 / (1.0 + e);
    } else {
        const double e = std::exp(z);
        s.soft[0] = 1.0 / (1.0 + e);
        s.soft[1] = e / (1.0 + e);
    }
    s.hard_index = s.soft[0] >= s.soft[1] ? 0 : 1;
    return s;
}

GumbelSample gumbel_softmax(double logit0, double logit1, double temperature, Rng& rng)
{
    if (!(temperature > 0.0)) throw ConfigError("gumbel_softmax: temperature must be positive");
    const double g0 = rng.gumbel();
    const double g1 = rng.gumbel();
    return gumbel_softmax_with_noise(logit0, logit1, g0, g1, temperature);
}

}  // namespace retdecomp
