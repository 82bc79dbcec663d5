#pragma once

#include "retdecomp/tensor.hpp"

#include <vector>

namespace retdecomp {

struct AdamConfig {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam over a fixed parameter group. Moment accumulators mirror the
/// parameter shapes; bias correction uses the step counter.
class Adam {
public:
    Adam() = default;
    Adam(ParameterRefs params, AdamConfig config = {});

    /// Applies one update from the accumulated gradients. Throws
    /// NumericError (and leaves every parameter untouched) on a non-finite
    /// gradient.
    void step();
    void zero_grad();

    long steps() const { return steps_; }
    const AdamConfig& config() const { return config_; }
    void set_lr(double lr) { config_.lr = lr; }
    const ParameterRefs& params() const { return params_; }
    const Tensor& first_moment(std::size_t i) const { return m_[i]; }
    const Tensor& second_moment(std::size_t i) const { return v_[i]; }

private:
    ParameterRefs params_;
    AdamConfig config_;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
    long steps_ = 0;
};

}  // namespace retdecomp
