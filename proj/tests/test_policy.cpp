#include "support.hpp"

#include "retdecomp/errors.hpp"
#include "retdecomp/policy.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace retdecomp;

namespace {

/// Output layer fixed to (mu, log_std) regardless of the state.
void pin_actor(Actor& actor, double mu, double log_std)
{
    Mlp& net = actor.mlp();
    const auto last = net.layer_count() - 1;
    net.weight(last).value.setZero();
    for (int k = 0; k < actor.d_a(); ++k) {
        net.bias(last).value(0, k) = mu;
        net.bias(last).value(0, actor.d_a() + k) = log_std;
    }
}

void pin_critic(Critic& critic, double q)
{
    for (auto& head : critic.heads()) {
        const auto last = head.layer_count() - 1;
        head.weight(last).value.setZero();
        head.bias(last).value.setConstant(q);
    }
}

SacBatch constant_batch(int n, int d_s, int d_a, double reward, double done)
{
    Rng rng(99);
    SacBatch b;
    b.states = rdtest::random_tensor(n, d_s, rng);
    b.actions = rdtest::random_tensor(n, d_a, rng);
    b.next_states = rdtest::random_tensor(n, d_s, rng);
    b.rewards = Tensor::Constant(n, 1, reward);
    b.done = Tensor::Constant(n, 1, done);
    return b;
}

double tanh_gaussian_log_density(double u, double mu, double sigma)
{
    const double z = (u - mu) / sigma;
    const double log_n = -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2 * std::numbers::pi);
    return log_n - std::log(1.0 - std::tanh(u) * std::tanh(u));
}

}  // namespace

TEST_CASE("actor: mean mode, saturation, Monte-Carlo mean")
{
    Rng rng(0);
    Actor actor(3, 2, 16, rng);
    pin_actor(actor, 0.0, 0.0);
    CHECK(actor.act(Vector::Ones(3), ActMode::Mean, rng).norm() == 0.0);
    pin_actor(actor, 40.0, 0.0);
    CHECK(actor.act(Vector::Ones(3), ActMode::Mean, rng).minCoeff() == doctest::Approx(1.0));

    pin_actor(actor, 0.3, std::log(0.05));
    Vector sum = Vector::Zero(2);
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        Vector a = actor.act(Vector::Zero(3), ActMode::Stochastic, rng);
        CHECK(a.cwiseAbs().maxCoeff() <= 1.0);
        sum += a;
    }
    // E[tanh(mu + sigma eps)] ~ tanh(mu) (1 - sigma^2 (1 - tanh(mu)^2)); the correction is ~2e-3
    CHECK(std::abs(sum(0) / n - std::tanh(0.3)) < 5e-3);
    CHECK_THROWS_AS(actor.act(Vector::Ones(2), ActMode::Mean, rng), ConfigError);
}

TEST_CASE("actor sample: log-probability oracle and gradients")
{
    Rng rng(1);
    Actor actor(2, 2, 8, rng);
    Tensor states = rdtest::random_tensor(5, 2, rng);
    Tensor eps = rdtest::random_tensor(5, 2, rng, -2, 2);
    Tape tape;
    auto s = actor.sample(tape, states, eps, true);
    Tensor out = actor.mlp().infer(states);
    for (int r = 0; r < 5; ++r) {
        double lp = 0;
        for (int k = 0; k < 2; ++k) {
            const double mu = out(r, k), sigma = std::exp(std::clamp(out(r, 2 + k), -20.0, 2.0));
            const double u = mu + sigma * eps(r, k);
            CHECK(s.action.value()(r, k) == doctest::Approx(std::tanh(u)).epsilon(1e-12));
            lp += tanh_gaussian_log_density(u, mu, sigma);
        }
        CHECK(s.log_prob.value()(r, 0) == doctest::Approx(lp).epsilon(1e-9));
    }
    auto rep = rdtest::check_gradients(actor.mlp().parameters(), [&](Tape& t) {
        auto x = actor.sample(t, states, eps, true);
        return ad::add(ad::sum(x.log_prob), ad::sum(ad::square(x.action)));
    });
    CHECK(rep.worst < 1e-4);
}

TEST_CASE("critic value: twin heads take the minimum, frozen version agrees")
{
    Rng rng(2);
    Critic c(3, 1, 8, true, rng);
    Tensor s = rdtest::random_tensor(6, 3, rng), a = rdtest::random_tensor(6, 1, rng);
    Tensor x(6, 4);
    x << s, a;
    Tensor expect = c.heads()[0].infer(x).cwiseMin(c.heads()[1].infer(x));
    CHECK(c.value(s, a).isApprox(expect, 1e-14));
    Tape tape;
    Var q = c.value_frozen(tape, s, tape.constant(a));
    CHECK(q.value().isApprox(expect, 1e-12));
    CHECK(c.parameters().size() == 12);
}

TEST_CASE("critic update: hand MSE, bootstrap off, terminal steps")
{
    Rng rng(3);
    Actor actor(2, 1, 8, rng);
    Critic critic(2, 1, 8, false, rng);
    pin_critic(critic, 0.0);
    Critic target = critic;
    Adam opt(critic.parameters());
    Rng r1(5);
    CHECK(critic_update(constant_batch(16, 2, 1, 1.0, 0.0), critic, target, actor, 0.2, 0.0, opt, r1) ==
          doctest::Approx(1.0));

    // With done = 1 the bootstrap term vanishes: same loss as gamma = 0.
    pin_critic(target, 5.0);
    pin_critic(critic, 0.0);
    Adam o1(critic.parameters()), o2(critic.parameters());
    Critic c1 = critic, c2 = critic;
    Adam a1(c1.parameters()), a2(c2.parameters());
    Rng ra(7), rb(7);
    const double terminal = critic_update(constant_batch(8, 2, 1, 2.0, 1.0), c1, target, actor, 0.2, 0.99, a1, ra);
    const double no_boot = critic_update(constant_batch(8, 2, 1, 2.0, 0.0), c2, target, actor, 0.2, 0.0, a2, rb);
    CHECK(terminal == doctest::Approx(no_boot));
    CHECK(terminal == doctest::Approx(4.0));

    SacBatch missing = constant_batch(4, 2, 1, 0.0, 0.0);
    missing.rewards.resize(0, 0);
    CHECK_THROWS_AS(critic_update(missing, critic, target, actor, 0.2, 0.9, opt, r1), UsageError);
}

TEST_CASE("actor update: constant critic leaves only the entropy term")
{
    Rng rng(4);
    Actor actor(2, 1, 8, rng);
    Critic critic(2, 1, 8, false, rng);
    pin_critic(critic, 3.0);
    SacBatch b = constant_batch(32, 2, 1, 0.0, 0.0);
    Actor copy = actor;
    Rng r1(11), r2(11);
    Adam opt(actor.mlp().parameters());
    const double loss = actor_update(b, actor, critic, 0.5, opt, r1);
    Tensor eps(32, 1);
    for (int i = 0; i < 32; ++i) eps(i, 0) = r2.normal();
    Tape tape;
    auto s = copy.sample(tape, b.states, eps, false);
    CHECK(loss == doctest::Approx(0.5 * s.log_prob.value().mean() - 3.0).epsilon(1e-12));
}

namespace {

/// Critic fitted to Q(a) = -(a - 0.5)^2 by regression (gamma = 0).
Critic quadratic_critic(Rng& rng)
{
    Critic critic(1, 1, 32, false, rng);
    Actor unused(1, 1, 4, rng);
    Adam opt(critic.parameters(), AdamConfig{.lr = 3e-3});
    for (int step = 0; step < 1500; ++step) {
        SacBatch b;
        b.states = Tensor::Zero(64, 1);
        b.next_states = Tensor::Zero(64, 1);
        b.actions = rdtest::random_tensor(64, 1, rng);
        b.rewards = -(b.actions.array() - 0.5).square().matrix();
        b.done = Tensor::Ones(64, 1);
        critic_update(b, critic, critic, unused, 0.0, 0.0, opt, rng);
    }
    return critic;
}

struct ToyResult {
    double action;
    double sigma;
};

ToyResult fit_actor(const Critic& critic, double alpha, int updates, std::uint64_t seed)
{
    Rng rng(seed);
    Actor actor(1, 1, 16, rng);
    pin_actor(actor, 0.0, std::log(0.3));
    Adam opt(actor.mlp().parameters(), AdamConfig{.lr = 1e-2});
    SacBatch b;
    b.states = Tensor::Zero(64, 1);
    b.next_states = b.states;
    b.actions = Tensor::Zero(64, 1);
    b.rewards = Tensor::Zero(64, 1);
    b.done = Tensor::Zero(64, 1);
    for (int i = 0; i < updates; ++i) actor_update(b, actor, critic, alpha, opt, rng);
    Tensor out = actor.mlp().infer(Tensor::Zero(1, 1));
    return {std::tanh(out(0, 0)), std::exp(std::clamp(out(0, 1), -20.0, 2.0))};
}

}  // namespace

TEST_CASE("actor update on a quadratic critic moves toward its peak; alpha widens sigma")
{
    Rng rng(5);
    Critic critic = quadratic_critic(rng);
    ToyResult low = fit_actor(critic, 0.001, 200, 1);
    CHECK(std::abs(low.action - 0.5) < 0.1);
    ToyResult high = fit_actor(critic, 0.1, 200, 1);
    CHECK(high.sigma > low.sigma);
}

TEST_CASE("temperature: sign of the update and positivity")
{
    Rng rng(6);
    Actor actor(1, 1, 8, rng);
    SacBatch b = constant_batch(32, 1, 1, 0.0, 0.0);

    // Narrow policy (entropy far below target): alpha grows.
    pin_actor(actor, 0.0, -6.0);
    Temperature t = Temperature::make(1.0, -1.0);
    Adam opt({&t.log_alpha}, AdamConfig{.lr = 0.01});
    temperature_update(b, actor, t, opt, rng);
    CHECK(t.alpha() > 1.0);

    // Wide policy (entropy above target): alpha shrinks, and stays positive.
    pin_actor(actor, 0.0, 1.0);
    Temperature w = Temperature::make(1.0, -1.0);
    Adam wopt({&w.log_alpha}, AdamConfig{.lr = 0.01});
    for (int i = 0; i < 10000; ++i) temperature_update(b, actor, w, wopt, rng);
    CHECK(w.alpha() < 1.0);
    CHECK(w.alpha() > 0.0);
    CHECK(std::isfinite(w.log_alpha.value(0, 0)));
    CHECK_THROWS_AS(Temperature::make(0.0, -1.0), ConfigError);
}

TEST_CASE("polyak averaging")
{
    Rng rng(7);
    Critic online(2, 1, 4, false, rng), target(2, 1, 4, false, rng);
    Critic keep = target;
    polyak_update(target, online, 0.0);
    CHECK(target.heads()[0].weight(0).value == keep.heads()[0].weight(0).value);
    polyak_update(target, online, 1.0);
    CHECK(target.heads()[0].weight(1).value == online.heads()[0].weight(1).value);

    for (auto& h : {&online, &target})
        for (auto* p : h->parameters()) p->value.setZero();
    for (auto* p : online.parameters()) p->value.setConstant(2.0);
    polyak_update(target, online, 0.5);
    CHECK(target.heads()[0].bias(2).value(0, 0) == 1.0);

    Critic a(2, 1, 4, false, rng), b(2, 1, 4, false, rng);
    auto gap = [&] {
        double g = 0;
        for (std::size_t i = 0; i < a.parameters().size(); ++i)
            g += (a.parameters()[i]->value - b.parameters()[i]->value).squaredNorm();
        return g;
    };
    double prev = gap();
    for (int i = 0; i < 20; ++i) {
        polyak_update(a, b, 0.05);
        const double now = gap();
        CHECK(now <= prev);
        prev = now;
    }
    Critic twin(2, 1, 4, true, rng);
    CHECK_THROWS_AS(polyak_update(twin, a, 0.5), ConfigError);
}

TEST_CASE("sac solves a dense one-step toy problem")
{
    // 1-dim state, reward -(a - 0.5)^2, horizon 16; optimum per-step reward is 0.
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SacConfig cfg;
        cfg.hidden = 32;
        cfg.gamma = 0.9;
        cfg.polyak = 0.01;
        cfg.lr = 1e-3;
        Rng init(seed), rng(seed + 100);
        SacAgent agent(1, 1, cfg, init);
        std::vector<double> s, a, r, s2, done;
        double state = 0;
        for (int step = 0; step < 20000; ++step) {
            Vector act = step < 1000 ? Vector::Constant(1, rng.uniform(-1, 1))
                                     : agent.actor().act(Vector::Constant(1, state), ActMode::Stochastic, rng);
            const double next = rng.uniform(-1, 1);
            s.push_back(state);
            a.push_back(act(0));
            r.push_back(-(act(0) - 0.5) * (act(0) - 0.5));
            s2.push_back(next);
            done.push_back(0.0);
            state = next;
            if (step >= 1000 && step % 4 == 0) {
                SacBatch b;
                const int n = 64;
                b.states.resize(n, 1);
                b.actions.resize(n, 1);
                b.rewards.resize(n, 1);
                b.next_states.resize(n, 1);
                b.done.resize(n, 1);
                for (int i = 0; i < n; ++i) {
                    const auto j = rng.index(s.size());
                    b.states(i, 0) = s[j];
                    b.actions(i, 0) = a[j];
                    b.rewards(i, 0) = r[j];
                    b.next_states(i, 0) = s2[j];
                    b.done(i, 0) = done[j];
                }
                agent.update(b, rng);
            }
        }
        double worst = 0;
        for (double x : {-1.0, 0.0, 1.0}) {
            const double act = agent.actor().act(Vector::Constant(1, x), ActMode::Mean, rng)(0);
            worst = std::min(worst, -(act - 0.5) * (act - 0.5));
        }
        CHECK(worst >= -0.05);
    }
}
