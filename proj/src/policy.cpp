#include "retdecomp/policy.hpp"

#include "retdecomp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace retdecomp {

namespace {

constexpr double kLogStdMin = -20.0;
constexpr double kLogStdMax = 2.0;

void check_batch(const SacBatch& b, int d_s, int d_a)
{
    const auto n = b.states.rows();
    if (b.rewards.size() == 0) throw UsageError("sac batch: rewards have not been relabelled");
    if (n == 0) throw UsageError("sac batch: empty");
    if (b.states.cols() != d_s || b.next_states.cols() != d_s || b.actions.cols() != d_a)
        throw ConfigError("sac batch: width mismatch");
    if (b.actions.rows() != n || b.rewards.rows() != n || b.next_states.rows() != n || b.done.rows() != n)
        throw ConfigError("sac batch: row count mismatch");
}

Tensor gaussian(Eigen::Index rows, int cols, Rng& rng)
{
    Tensor eps(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) eps(r, c) = rng.normal();
    return eps;
}

}  // namespace

Actor::Actor(int d_s, int d_a, int hidden, Rng& rng)
    : d_s_(d_s), d_a_(d_a), mlp_("actor", {d_s, hidden, hidden, 2 * d_a}, rng)
{
}

Vector Actor::act(const Vector& state, ActMode mode, Rng& rng) const
{
    if (state.size() != d_s_) throw ConfigError("actor: state width mismatch");
    Tensor out = mlp_.infer(state.transpose());
    Vector a(d_a_);
    for (int k = 0; k < d_a_; ++k) {
        double u = out(0, k);
        if (mode == ActMode::Stochastic) {
            const double log_std = std::clamp(out(0, d_a_ + k), kLogStdMin, kLogStdMax);
            u += std::exp(log_std) * rng.normal();
        }
        a(k) = std::tanh(u);
    }
    return a;
}

Actor::Sample Actor::sample(Tape& tape, const Tensor& states, const Tensor& eps, bool trainable)
{
    if (eps.rows() != states.rows() || eps.cols() != d_a_) throw ConfigError("actor: noise shape mismatch");
    Var x = tape.constant(states);
    Var out = trainable ? mlp_.forward(tape, x) : mlp_.forward_frozen(tape, x);
    Var mu = ad::slice_cols(out, 0, d_a_);
    Var log_std = ad::clamp(ad::slice_cols(out, d_a_, d_a_), kLogStdMin, kLogStdMax);
    Var e = tape.constant(eps);
    Var u = ad::add(mu, ad::mul(ad::exp(log_std), e));
    Var action = ad::tanh(u);
    // log N(u; mu, sigma) - log(1 - tanh(u)^2), with the second term written
    // as 2 (log 2 - u - softplus(-2u)) for stability.
    const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
    Var gauss = ad::add_scalar(ad::neg(ad::add(log_std, tape.constant(0.5 * eps.array().square().matrix()))),
                               -half_log_2pi);
    Var squash = ad::scale(ad::sub(ad::add_scalar(ad::neg(u), std::log(2.0)), ad::softplus(ad::scale(u, -2.0))), 2.0);
    Var log_prob = ad::sum_cols(ad::sub(gauss, squash));
    return {action, log_prob};
}

Critic::Critic(int d_s, int d_a, int hidden, bool twin, Rng& rng)
{
    heads_.emplace_back("critic0", std::vector<int>{d_s + d_a, hidden, hidden, 1}, rng);
    if (twin) heads_.emplace_back("critic1", std::vector<int>{d_s + d_a, hidden, hidden, 1}, rng);
}

ParameterRefs Critic::parameters()
{
    ParameterRefs out;
    for (auto& h : heads_)
        for (auto* p : h.parameters()) out.push_back(p);
    return out;
}

Tensor Critic::value(const Tensor& states, const Tensor& actions) const
{
    Tensor x(states.rows(), states.cols() + actions.cols());
    x << states, actions;
    Tensor q = heads_.front().infer(x);
    for (std::size_t h = 1; h < heads_.size(); ++h) q = q.cwiseMin(heads_[h].infer(x));
    return q;
}

Var Critic::value_frozen(Tape& tape, const Tensor& states, Var actions) const
{
    const Var parts[] = {tape.constant(states), actions};
    Var x = ad::concat_cols(parts);
    Var q = heads_.front().forward_frozen(tape, x);
    for (std::size_t h = 1; h < heads_.size(); ++h) {
        Var other = heads_[h].forward_frozen(tape, x);
        // min(a, b) = b + min(a - b, 0) = b - relu(b - a)
        q = ad::sub(other, ad::relu(ad::sub(other, q)));
    }
    return q;
}

Temperature Temperature::make(double initial_alpha, double target_entropy)
{
    if (!(initial_alpha > 0.0)) throw ConfigError("initial alpha must be positive");
    Temperature t;
    t.log_alpha.name = "log_alpha";
    t.log_alpha.value = Tensor::Constant(1, 1, std::log(initial_alpha));
    t.log_alpha.grad = Tensor::Zero(1, 1);
    t.target_entropy = target_entropy;
    return t;
}

double critic_update(const SacBatch& batch, Critic& critic, const Critic& target, Actor& actor, double alpha,
                     double gamma, Adam& opt, Rng& rng)
{
    check_batch(batch, actor.d_s(), actor.d_a());
    const auto n = batch.states.rows();
    Tensor y;
    {
        Tape tape;
        auto next = actor.sample(tape, batch.next_states, gaussian(n, actor.d_a(), rng), false);
        Tensor q_next = target.value(batch.next_states, next.action.value());
        Tensor soft = q_next - alpha * next.log_prob.value();
        y = batch.rewards.array() + gamma * (1.0 - batch.done.array()) * soft.array();
    }
    Tape tape;
    Tensor x(n, batch.states.cols() + batch.actions.cols());
    x << batch.states, batch.actions;
    Var input = tape.constant(std::move(x));
    Var target_y = tape.constant(y);
    Var loss;
    bool first = true;
    for (auto& head : critic.heads()) {
        Var l = ad::mean(ad::square(ad::sub(head.forward(tape, input), target_y)));
        loss = first ? l : ad::add(loss, l);
        first = false;
    }
    opt.zero_grad();
    tape.backward(loss);
    opt.step();
    return loss.scalar();
}

double actor_update(const SacBatch& batch, Actor& actor, const Critic& critic, double alpha, Adam& opt, Rng& rng)
{
    check_batch(batch, actor.d_s(), actor.d_a());
    Tape tape;
    auto s = actor.sample(tape, batch.states, gaussian(batch.states.rows(), actor.d_a(), rng), true);
    Var q = critic.value_frozen(tape, batch.states, s.action);
    Var loss = ad::mean(ad::sub(ad::scale(s.log_prob, alpha), q));
    opt.zero_grad();
    tape.backward(loss);
    opt.step();
    return loss.scalar();
}

double temperature_update(const SacBatch& batch, Actor& actor, Temperature& temp, Adam& opt, Rng& rng)
{
    check_batch(batch, actor.d_s(), actor.d_a());
    Tensor log_prob;
    {
        Tape tape;
        log_prob = actor.sample(tape, batch.states, gaussian(batch.states.rows(), actor.d_a(), rng), false)
                       .log_prob.value();
    }
    Tape tape;
    Var alpha = ad::exp(tape.parameter(temp.log_alpha));
    const double shift = log_prob.mean() + temp.target_entropy;
    Var loss = ad::scale(alpha, -shift);
    opt.zero_grad();
    tape.backward(loss);
    opt.step();
    return loss.scalar();
}

void polyak_update(Critic& target, const Critic& online, double rho)
{
    if (target.heads().size() != online.heads().size()) throw ConfigError("polyak: critic head mismatch");
    for (std::size_t h = 0; h < online.heads().size(); ++h) {
        auto& t = target.heads()[h];
        const auto& o = online.heads()[h];
        for (std::size_t l = 0; l < o.layer_count(); ++l) {
            t.weight(l).value = (1.0 - rho) * t.weight(l).value + rho * o.weight(l).value;
            t.bias(l).value = (1.0 - rho) * t.bias(l).value + rho * o.bias(l).value;
        }
    }
}

SacAgent::SacAgent(int d_s, int d_a, const SacConfig& config, Rng& init_rng)
    : config_(config),
      actor_(d_s, d_a, config.hidden, init_rng),
      critic_(d_s, d_a, config.hidden, config.twin_critic, init_rng),
      target_(critic_),
      temp_(Temperature::make(config.initial_alpha, -static_cast<double>(d_a)))
{
    const AdamConfig adam{.lr = config.lr};
    actor_opt_ = Adam(actor_.mlp().parameters(), adam);
    critic_opt_ = Adam(critic_.parameters(), adam);
    temp_opt_ = Adam({&temp_.log_alpha}, adam);
}

SacLosses SacAgent::update(const SacBatch& batch, Rng& rng)
{
    SacLosses out;
    out.critic = critic_update(batch, critic_, target_, actor_, temp_.alpha(), config_.gamma, critic_opt_, rng);
    out.actor = actor_update(batch, actor_, critic_, temp_.alpha(), actor_opt_, rng);
    out.temperature = temperature_update(batch, actor_, temp_, temp_opt_, rng);
    polyak_update(target_, critic_, config_.polyak);
    return out;
}

}  // namespace retdecomp
