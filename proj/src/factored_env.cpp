#include "retdecomp/factored_env.hpp"

#include "retdecomp/errors.hpp"

#include <cmath>

namespace retdecomp {

std::string to_string(DynamicsKind k) { return k == DynamicsKind::Linear ? "linear" : "random-mlp"; }

std::string to_string(ObserveMode m)
{
    switch (m) {
    case ObserveMode::Dense: return "dense";
    case ObserveMode::Episodic: return "episodic";
    case ObserveMode::EveryK: return "every_k";
    }
    return "?";
}

DynamicsKind parse_dynamics_kind(const std::string& s)
{
    if (s == "linear") return DynamicsKind::Linear;
    if (s == "random-mlp") return DynamicsKind::RandomMlp;
    throw ConfigError("unknown dynamics kind '" + s + "'");
}

ObserveMode parse_observe_mode(const std::string& s)
{
    if (s == "dense") return ObserveMode::Dense;
    if (s == "episodic") return ObserveMode::Episodic;
    if (s == "every_k") return ObserveMode::EveryK;
    throw ConfigError("unknown observe mode '" + s + "'");
}

namespace {

bool is_binary(const MaskMatrix& m) { return ((m.array() == 0) || (m.array() == 1)).all(); }
bool is_binary(const MaskVector& m) { return ((m.array() == 0) || (m.array() == 1)).all(); }

template <class M>
void require_shape(const M& m, Eigen::Index r, Eigen::Index c, const char* what)
{
    if (m.rows() != r || m.cols() != c)
        throw ConfigError(std::string(what) + ": expected " + std::to_string(r) + "x" + std::to_string(c) +
                          ", got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

}  // namespace

void EnvSpec::validate() const
{
    if (d_s < 1 || d_a < 1) throw ConfigError("env: dimensions must be >= 1");
    require_shape(mask_ss, d_s, d_s, "mask_ss");
    require_shape(mask_as, d_a, d_s, "mask_as");
    require_shape(mask_sr, d_s, 1, "mask_sr");
    require_shape(mask_ar, d_a, 1, "mask_ar");
    if (!is_binary(mask_ss) || !is_binary(mask_as) || !is_binary(mask_sr) || !is_binary(mask_ar))
        throw ConfigError("env: masks must be binary");
    if (mask_sr.sum() + mask_ar.sum() == 0) throw ConfigError("env: reward has no parents");
    if (dynamics_kind == DynamicsKind::Linear) {
        require_shape(w_ss, d_s, d_s, "w_ss");
        require_shape(w_as, d_a, d_s, "w_as");
        require_shape(bias, d_s, 1, "bias");
    } else {
        if (static_cast<int>(generators.size()) != d_s) throw ConfigError("env: one generator per state dim");
        for (const auto& g : generators) {
            require_shape(g.w_in, d_s + d_a, kGeneratorHidden, "generator.w_in");
            require_shape(g.b_in, kGeneratorHidden, 1, "generator.b_in");
            require_shape(g.w_out, kGeneratorHidden, 1, "generator.w_out");
        }
    }
    require_shape(w_sr, d_s, 1, "w_sr");
    if (noise_std_state < 0 || noise_std_reward < 0 || init_state_std < 0)
        throw ConfigError("env: noise scales must be >= 0");
    if (horizon < 1) throw ConfigError("env: horizon must be positive");
    if (observe_mode == ObserveMode::EveryK && observe_k < 1) throw ConfigError("env: every_k needs k >= 1");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("env: gamma must lie in (0, 1]");
}

bool EnvSpec::operator==(const EnvSpec& o) const
{
    if (d_s != o.d_s || d_a != o.d_a || dynamics_kind != o.dynamics_kind) return false;
    if (mask_ss != o.mask_ss || mask_as != o.mask_as || mask_sr != o.mask_sr || mask_ar != o.mask_ar) return false;
    if (dynamics_kind == DynamicsKind::Linear) {
        if (w_ss != o.w_ss || w_as != o.w_as || bias != o.bias) return false;
    } else {
        if (generators.size() != o.generators.size()) return false;
        for (std::size_t j = 0; j < generators.size(); ++j) {
            const auto &a = generators[j], &b = o.generators[j];
            if (a.w_in != b.w_in || a.b_in != b.b_in || a.w_out != b.w_out || a.b_out != b.b_out) return false;
        }
    }
    return w_sr == o.w_sr && action_cost == o.action_cost && reward_bias == o.reward_bias &&
           noise_std_state == o.noise_std_state && noise_std_reward == o.noise_std_reward &&
           init_state_std == o.init_state_std && horizon == o.horizon && observe_mode == o.observe_mode &&
           observe_k == o.observe_k && gamma == o.gamma;
}

namespace {

constexpr int kMaxMaskDraws = 1000;
constexpr double kMaxRowGain = 0.95;

double signed_magnitude(Rng& rng, double lo, double hi)
{
    const double m = rng.uniform(lo, hi);
    return rng.bernoulli(0.5) ? m : -m;
}

void draw_generators(EnvSpec& spec, Rng& rng)
{
    const int d_s = spec.d_s, d_a = spec.d_a;
    if (spec.dynamics_kind == DynamicsKind::Linear) {
        spec.w_ss = Tensor::Zero(d_s, d_s);
        spec.w_as = Tensor::Zero(d_a, d_s);
        spec.bias = Vector::Zero(d_s);
        for (int j = 0; j < d_s; ++j) {
            double row_l1 = 0.0;
            for (int i = 0; i < d_s; ++i) {
                const double w = signed_magnitude(rng, 0.3, 1.0);
                if (spec.mask_ss(i, j)) {
                    spec.w_ss(i, j) = w;
                    row_l1 += std::abs(w);
                }
            }
            // L1 gain of each output row <= 0.95 bounds the infinity-norm of
            // the state transition matrix, so the noise-free map is a contraction.
            if (row_l1 > kMaxRowGain)
                for (int i = 0; i < d_s; ++i) spec.w_ss(i, j) *= kMaxRowGain / row_l1;
            for (int k = 0; k < d_a; ++k) {
                const double w = signed_magnitude(rng, 0.5, 1.0);
                if (spec.mask_as(k, j)) spec.w_as(k, j) = w;
            }
            spec.bias(j) = rng.uniform(-0.2, 0.2);
        }
    } else {
        spec.generators.clear();
        const int in = d_s + d_a;
        for (int j = 0; j < d_s; ++j) {
            MlpGenerator g;
            g.w_in = Tensor::Zero(in, kGeneratorHidden);
            g.b_in = Vector::Zero(kGeneratorHidden);
            g.w_out = Vector::Zero(kGeneratorHidden);
            for (int h = 0; h < kGeneratorHidden; ++h) {
                for (int i = 0; i < in; ++i) {
                    const bool on = i < d_s ? spec.mask_ss(i, j) : spec.mask_as(i - d_s, j);
                    const double w = rng.uniform(-1.5, 1.5);
                    if (on) g.w_in(i, h) = w;
                }
                g.b_in(h) = rng.uniform(-0.5, 0.5);
                g.w_out(h) = rng.uniform(-1.0, 1.0);
            }
            // tanh units are bounded, so scaling the readout to L1 norm 2 bounds the state.
            const double l1 = g.w_out.cwiseAbs().sum();
            if (l1 > 0) g.w_out *= 2.0 / l1;
            g.b_out = rng.uniform(-0.2, 0.2);
            spec.generators.push_back(std::move(g));
        }
    }
    spec.w_sr = Vector::Zero(d_s);
    for (int i = 0; i < d_s; ++i) {
        const double w = signed_magnitude(rng, 0.5, 1.0);
        if (spec.mask_sr(i)) spec.w_sr(i) = w;
    }
}

}  // namespace

EnvSpec generate_spec(const GenerateOptions& opts)
{
    if (opts.d_s < 1 || opts.d_a < 1) throw ConfigError("generate_spec: dimensions must be >= 1");
    if (!(opts.edge_density >= 0.0 && opts.edge_density <= 1.0))
        throw ConfigError("generate_spec: edge density must lie in [0, 1]");
    Rng rng = Rng::stream(opts.seed, "env-spec");
    EnvSpec spec;
    spec.d_s = opts.d_s;
    spec.d_a = opts.d_a;
    spec.dynamics_kind = opts.kind;
    const double p = opts.edge_density;
    int draws = 0;
    for (;; ++draws) {
        if (draws == kMaxMaskDraws)
            throw ConfigError("generate_spec: no reward-relevant state dim after " + std::to_string(kMaxMaskDraws) +
                              " draws (edge density too low)");
        spec.mask_ss = MaskMatrix::Zero(opts.d_s, opts.d_s);
        spec.mask_as = MaskMatrix::Zero(opts.d_a, opts.d_s);
        spec.mask_sr = MaskVector::Zero(opts.d_s);
        spec.mask_ar = MaskVector::Zero(opts.d_a);
        for (Eigen::Index i = 0; i < spec.mask_ss.size(); ++i) spec.mask_ss.data()[i] = rng.bernoulli(p);
        for (Eigen::Index i = 0; i < spec.mask_as.size(); ++i) spec.mask_as.data()[i] = rng.bernoulli(p);
        for (int i = 0; i < opts.d_s; ++i) spec.mask_sr(i) = rng.bernoulli(p);
        for (int k = 0; k < opts.d_a; ++k) spec.mask_ar(k) = opts.action_cost_all_dims ? 1 : rng.bernoulli(p);
        if (spec.mask_sr.sum() > 0) break;
    }
    draw_generators(spec, rng);
    spec.action_cost = opts.action_cost;
    spec.noise_std_state = opts.noise_std_state;
    spec.noise_std_reward = opts.noise_std_reward;
    spec.horizon = opts.horizon;
    spec.observe_mode = opts.observe_mode;
    spec.observe_k = opts.observe_k;
    spec.gamma = opts.gamma;
    spec.validate();
    return spec;
}

EnvSpec chain_spec(int k, double noise_std_state)
{
    if (k < 1) throw ConfigError("chain_spec: k must be >= 1");
    EnvSpec spec;
    spec.d_s = k;
    spec.d_a = 1;
    spec.mask_ss = MaskMatrix::Zero(k, k);
    spec.mask_as = MaskMatrix::Zero(1, k);
    spec.mask_sr = MaskVector::Zero(k);
    spec.mask_ar = MaskVector::Ones(1);
    spec.mask_as(0, 0) = 1;
    spec.mask_sr(k - 1) = 1;
    spec.dynamics_kind = DynamicsKind::Linear;
    spec.w_ss = Tensor::Zero(k, k);
    spec.w_as = Tensor::Zero(1, k);
    spec.bias = Vector::Zero(k);
    spec.w_as(0, 0) = 0.9;
    for (int j = 1; j < k; ++j) {
        spec.mask_as(0, j) = 1;
        spec.w_as(0, j) = 0.3;
    }
    for (int i = 0; i + 1 < k; ++i) {
        spec.mask_ss(i, i + 1) = 1;
        spec.w_ss(i, i + 1) = 0.6;
    }
    spec.w_sr = Vector::Zero(k);
    spec.w_sr(k - 1) = 1.0;
    spec.noise_std_state = noise_std_state;
    spec.validate();
    return spec;
}

EnvSpec distractor_spec(std::uint64_t seed)
{
    EnvSpec spec;
    const int d_s = 6, d_a = 2;
    spec.d_s = d_s;
    spec.d_a = d_a;
    spec.dynamics_kind = DynamicsKind::Linear;
    spec.mask_ss = MaskMatrix::Zero(d_s, d_s);
    spec.mask_as = MaskMatrix::Zero(d_a, d_s);
    spec.w_ss = Tensor::Zero(d_s, d_s);
    spec.w_as = Tensor::Zero(d_a, d_s);
    spec.bias = Vector::Zero(d_s);
    auto edge_ss = [&](int i, int j, double w) { spec.mask_ss(i, j) = 1; spec.w_ss(i, j) = w; };
    auto edge_as = [&](int k, int j, double w) { spec.mask_as(k, j) = 1; spec.w_as(k, j) = w; };
    // Reward-relevant pair, each steered by one action.
    edge_ss(0, 0, 0.8);
    edge_as(0, 0, 0.6);
    edge_ss(1, 1, 0.8);
    edge_as(1, 1, 0.6);
    // Distractors: persistent, partly action-driven, never reaching the reward.
    Rng rng = Rng::stream(seed, "distractor-spec");
    edge_ss(2, 2, 0.9);
    edge_as(0, 2, 0.5);
    edge_ss(3, 3, 0.7);
    edge_ss(2, 3, 0.25);
    edge_ss(4, 4, 0.9);
    edge_as(1, 4, -0.5);
    edge_ss(5, 5, 0.6);
    edge_ss(4, 5, 0.3);
    for (int j = 2; j < d_s; ++j) spec.bias(j) = rng.uniform(-0.3, 0.3);
    spec.mask_sr = MaskVector::Zero(d_s);
    spec.mask_ar = MaskVector::Ones(d_a);
    spec.mask_sr(0) = spec.mask_sr(1) = 1;
    spec.w_sr = Vector::Zero(d_s);
    spec.w_sr(0) = 0.5;
    spec.w_sr(1) = 0.5;
    spec.action_cost = 1.0;
    spec.noise_std_state = 0.3;
    spec.init_state_std = 1.0;
    spec.horizon = 64;
    spec.observe_mode = ObserveMode::Episodic;
    spec.validate();
    return spec;
}

Vector transition_mean(const EnvSpec& spec, const Vector& s, const Vector& a)
{
    if (s.size() != spec.d_s || a.size() != spec.d_a) throw ConfigError("transition: state/action width mismatch");
    Vector next(spec.d_s);
    if (spec.dynamics_kind == DynamicsKind::Linear) {
        for (int j = 0; j < spec.d_s; ++j) {
            double v = spec.bias(j);
            for (int i = 0; i < spec.d_s; ++i)
                if (spec.mask_ss(i, j)) v += spec.w_ss(i, j) * s(i);
            for (int k = 0; k < spec.d_a; ++k)
                if (spec.mask_as(k, j)) v += spec.w_as(k, j) * a(k);
            next(j) = v;
        }
    } else {
        Vector x(spec.d_s + spec.d_a);
        for (int j = 0; j < spec.d_s; ++j) {
            for (int i = 0; i < spec.d_s; ++i) x(i) = spec.mask_ss(i, j) ? s(i) : 0.0;
            for (int k = 0; k < spec.d_a; ++k) x(spec.d_s + k) = spec.mask_as(k, j) ? a(k) : 0.0;
            const auto& g = spec.generators[static_cast<std::size_t>(j)];
            Vector h = (g.w_in.transpose() * x + g.b_in).array().tanh();
            next(j) = g.w_out.dot(h) + g.b_out;
        }
    }
    return next;
}

double oracle_reward(const EnvSpec& spec, const Vector& s, const Vector& a)
{
    if (s.size() != spec.d_s || a.size() != spec.d_a) throw ConfigError("reward: state/action width mismatch");
    double r = spec.reward_bias;
    for (int i = 0; i < spec.d_s; ++i)
        if (spec.mask_sr(i)) r += spec.w_sr(i) * s(i);
    for (int k = 0; k < spec.d_a; ++k)
        if (spec.mask_ar(k)) r -= spec.action_cost * a(k) * a(k);
    return r;
}

FactoredEnv::FactoredEnv(EnvSpec spec, std::uint64_t seed) : spec_(std::move(spec)), rng_(Rng::stream(seed, "env"))
{
    spec_.validate();
    state_ = Vector::Zero(spec_.d_s);
}

Vector FactoredEnv::reset()
{
    state_.resize(spec_.d_s);
    for (int i = 0; i < spec_.d_s; ++i) state_(i) = rng_.normal(0.0, spec_.init_state_std);
    t_ = 1;
    pending_ = 0.0;
    last_reward_ = 0.0;
    started_ = true;
    return state_;
}

StepResult FactoredEnv::step(const Vector& action)
{
    if (!started_) throw UsageError("env: step before reset");
    if (done()) throw UsageError("env: step after episode end");
    if (action.size() != spec_.d_a) throw ConfigError("env: action width mismatch");
    if (!action.allFinite()) throw NumericError("env: non-finite action");
    const Vector a = action.cwiseMax(-1.0).cwiseMin(1.0);

    const double r = oracle_reward(spec_, state_, a) + spec_.noise_std_reward * rng_.normal();
    Vector next = transition_mean(spec_, state_, a);
    for (int j = 0; j < spec_.d_s; ++j) next(j) += spec_.noise_std_state * rng_.normal();

    // Accumulate discounted reward mass, then release it so that
    // sum_t gamma^(t-1) o_t equals sum_t gamma^(t-1) r_t.
    const double disc = std::pow(spec_.gamma, t_ - 1);
    pending_ += disc * r;
    const bool last = t_ == spec_.horizon;
    bool emit = false;
    switch (spec_.observe_mode) {
    case ObserveMode::Dense: emit = true; break;
    case ObserveMode::Episodic: emit = last; break;
    case ObserveMode::EveryK: emit = last || t_ % spec_.observe_k == 0; break;
    }
    StepResult out;
    if (emit) {
        out.observed_reward = spec_.observe_mode == ObserveMode::Dense ? r : pending_ / disc;
        pending_ = 0.0;
    }
    last_reward_ = r;
    state_ = next;
    out.next_state = std::move(next);
    ++t_;
    out.done = done();
    return out;
}

Trajectory rollout(FactoredEnv& env, const Policy& policy)
{
    Trajectory traj;
    Vector s = env.reset();
    traj.states.push_back(s);
    const double gamma = env.spec().gamma;
    double disc = 1.0;
    while (!env.done()) {
        Vector a = policy(s);
        if (!a.allFinite()) throw NumericError("rollout: policy emitted a non-finite action");
        a = a.cwiseMax(-1.0).cwiseMin(1.0);
        StepResult res = env.step(a);
        traj.actions.push_back(a);
        traj.observed.push_back(res.observed_reward);
        traj.true_rewards.push_back(env.last_true_reward());
        traj.ret += disc * res.observed_reward;
        disc *= gamma;
        s = res.next_state;
        traj.states.push_back(s);
    }
    return traj;
}

Policy uniform_random_policy(int d_a, Rng& rng)
{
    return [d_a, &rng](const Vector&) {
        Vector a(d_a);
        for (int k = 0; k < d_a; ++k) a(k) = rng.uniform(-1.0, 1.0);
        return a;
    };
}

}  // namespace retdecomp
