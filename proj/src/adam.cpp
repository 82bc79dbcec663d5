#include "retdecomp/adam.hpp"

#include "retdecomp/errors.hpp"

#include <cmath>

namespace retdecomp {

Adam::Adam(ParameterRefs params, AdamConfig config) : params_(std::move(params)), config_(config)
{
    for (auto* p : params_) {
        m_.push_back(Tensor::Zero(p->value.rows(), p->value.cols()));
        v_.push_back(Tensor::Zero(p->value.rows(), p->value.cols()));
    }
}

void Adam::step()
{
    for (auto* p : params_) {
        if (p->grad.rows() != p->value.rows() || p->grad.cols() != p->value.cols())
            throw ConfigError("adam: gradient shape does not match parameter " + p->name);
        if (!p->grad.allFinite()) throw NumericError("adam: non-finite gradient for " + p->name);
    }
    ++steps_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& g = params_[i]->grad;
        m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
        v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g.cwiseAbs2();
        params_[i]->value.array() -=
            config_.lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + config_.eps);
    }
}

void Adam::zero_grad()
{
    for (auto* p : params_) p->zero_grad();
}

}  // namespace retdecomp
