#include "retdecomp/trainer.hpp"

#include "retdecomp/env_io.hpp"
#include "retdecomp/errors.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace retdecomp {

ReplayBuffer::ReplayBuffer(long capacity) : capacity_(capacity)
{
    if (capacity <= 0) throw ConfigError("replay buffer capacity must be positive");
}

void ReplayBuffer::add(Trajectory traj)
{
    const auto len = static_cast<long>(traj.length());
    if (len == 0) throw UsageError("replay buffer: empty trajectory");
    if (len > capacity_) throw ConfigError("replay buffer: trajectory longer than the capacity");
    while (steps_ + len > capacity_) {
        steps_ -= static_cast<long>(trajs_.front().length());
        trajs_.pop_front();
    }
    trajs_.push_back(std::move(traj));
    steps_ += len;
    starts_.clear();
    long acc = 0;
    for (const auto& t : trajs_) {
        starts_.push_back(acc);
        acc += static_cast<long>(t.length());
    }
}

std::vector<const Trajectory*> ReplayBuffer::sample_trajectories(int m, Rng& rng) const
{
    if (trajs_.empty()) throw UsageError("sample_D1: replay buffer is empty");
    std::vector<const Trajectory*> out;
    if (trajs_.size() < static_cast<std::size_t>(m)) {
        for (int i = 0; i < m; ++i) out.push_back(&trajs_[rng.index(trajs_.size())]);
        return out;
    }
    // Partial Fisher-Yates over indices.
    std::vector<std::size_t> idx(trajs_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (int i = 0; i < m; ++i) {
        const std::size_t j = static_cast<std::size_t>(i) + rng.index(idx.size() - static_cast<std::size_t>(i));
        std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
        out.push_back(&trajs_[idx[static_cast<std::size_t>(i)]]);
    }
    return out;
}

Transition ReplayBuffer::transition(std::size_t traj, std::size_t t) const
{
    const Trajectory& tr = trajs_.at(traj);
    if (t >= tr.length()) throw UsageError("replay buffer: step index out of range");
    Transition out;
    out.s = tr.states[t];
    out.a = tr.actions[t];
    out.s_next = tr.states[t + 1];
    out.traj_return = tr.ret;
    out.traj_length = static_cast<int>(tr.length());
    out.last = t + 1 == tr.length();
    return out;
}

std::vector<Transition> ReplayBuffer::sample_transitions(int n, Rng& rng) const
{
    if (trajs_.empty()) throw UsageError("sample_D2: replay buffer is empty");
    std::vector<Transition> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const long g = static_cast<long>(rng.index(static_cast<std::size_t>(steps_)));
        const auto it = std::upper_bound(starts_.begin(), starts_.end(), g) - 1;
        const auto traj = static_cast<std::size_t>(it - starts_.begin());
        out.push_back(transition(traj, static_cast<std::size_t>(g - *it)));
    }
    return out;
}

SacBatch relabel(std::span<const Transition> batch, const RewardNet& reward, const MaskSample& masks,
                 const MaskVector& policy_mask, Variant variant, bool terminal_at_horizon)
{
    if (batch.empty()) throw UsageError("relabel: empty batch");
    const auto n = static_cast<Eigen::Index>(batch.size());
    const int d_s = static_cast<int>(batch.front().s.size());
    const int d_a = static_cast<int>(batch.front().a.size());
    SacBatch out;
    out.states.resize(n, d_s);
    out.actions.resize(n, d_a);
    out.next_states.resize(n, d_s);
    out.done = Tensor::Zero(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& tr = batch[static_cast<std::size_t>(i)];
        out.states.row(i) = tr.s.transpose();
        out.actions.row(i) = tr.a.transpose();
        out.next_states.row(i) = tr.s_next.transpose();
        if (terminal_at_horizon && tr.last) out.done(i, 0) = 1.0;
    }
    if (variant == Variant::UniformBaseline) {
        out.rewards.resize(n, 1);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& tr = batch[static_cast<std::size_t>(i)];
            out.rewards(i, 0) = tr.traj_return / tr.traj_length;
        }
    } else {
        out.rewards = reward.predict_batch(out.states, out.actions, masks.sr, masks.ar);
    }
    if (variant == Variant::Grd) {
        const Eigen::RowVectorXd keep = policy_mask.cast<double>().transpose();
        out.states.array().rowwise() *= keep.array();
        out.next_states.array().rowwise() *= keep.array();
    }
    return out;
}

std::vector<double> relabel_trajectory(const Trajectory& traj, const RewardNet& reward, const MaskSample& masks,
                                       Variant variant)
{
    const std::size_t len = traj.length();
    if (variant == Variant::UniformBaseline) return std::vector<double>(len, traj.ret / static_cast<double>(len));
    Tensor S(static_cast<Eigen::Index>(len), reward.d_s());
    Tensor A(static_cast<Eigen::Index>(len), reward.d_a());
    for (std::size_t t = 0; t < len; ++t) {
        S.row(static_cast<Eigen::Index>(t)) = traj.states[t].transpose();
        A.row(static_cast<Eigen::Index>(t)) = traj.actions[t].transpose();
    }
    Tensor r = reward.predict_batch(S, A, masks.sr, masks.ar);
    return std::vector<double>(r.data(), r.data() + r.size());
}

namespace {

std::string csv_number(double v)
{
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_csv_number(const std::string& s)
{
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw IoError("metrics csv: bad number '" + s + "'");
    return v;
}

// Seeds the evaluation environment separately from the training one.
std::uint64_t eval_seed(std::uint64_t seed) { return Rng::stream(seed, "eval-env").next_u64(); }

constexpr int kMetricTrajectories = 64;
constexpr int kMetricTransitions = 256;

}  // namespace

std::string metrics_csv_row(const MetricsRecord& r)
{
    std::string out = std::to_string(r.step);
    for (double v : {r.avg_return, r.l_rew, r.l_dyn, r.l_sp, r.s_zr, r.f1_sr, r.f1_ss})
        out += "," + csv_number(v);
    out += "," + (r.pearson_r ? csv_number(*r.pearson_r) : std::string("nan"));
    return out;
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRecord> records)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << kMetricsHeader << '\n';
    for (const auto& r : records) out << metrics_csv_row(r) << '\n';
    if (!out) throw IoError("short write to '" + path.string() + "'");
}

std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != kMetricsHeader) throw IoError("metrics csv: unexpected header");
    std::vector<MetricsRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 9) throw IoError("metrics csv: expected 9 columns");
        MetricsRecord r;
        r.step = static_cast<long>(parse_csv_number(cells[0]));
        r.avg_return = parse_csv_number(cells[1]);
        r.l_rew = parse_csv_number(cells[2]);
        r.l_dyn = parse_csv_number(cells[3]);
        r.l_sp = parse_csv_number(cells[4]);
        r.s_zr = parse_csv_number(cells[5]);
        r.f1_sr = parse_csv_number(cells[6]);
        r.f1_ss = parse_csv_number(cells[7]);
        const double p = parse_csv_number(cells[8]);
        if (!std::isnan(p)) r.pearson_r = p;
        out.push_back(r);
    }
    return out;
}

Trainer::Trainer(RunConfig config, EnvSpec spec)
    : config_(std::move(config)),
      spec_(std::move(spec)),
      init_rng_(Rng::stream(config_.seed, "init")),
      explore_rng_(Rng::stream(config_.seed, "explore")),
      gumbel_rng_(Rng::stream(config_.seed, "gumbel")),
      buffer_rng_(Rng::stream(config_.seed, "buffer")),
      sac_rng_(Rng::stream(config_.seed, "sac")),
      metrics_rng_(Rng::stream(config_.seed, "metrics")),
      env_(spec_, config_.seed),
      eval_env_(spec_, eval_seed(config_.seed)),
      buffer_(config_.buffer_capacity),
      logits_(MaskLogits::zeros(spec_.d_s, spec_.d_a)),
      reward_(spec_.d_s, spec_.d_a, config_.model_hidden, init_rng_),
      dyn_(spec_.d_s, spec_.d_a, config_.model_hidden, config_.dyn_dim_embedding, init_rng_)
{
    config_.validate();
    if (spec_.horizon > config_.buffer_capacity) throw ConfigError("buffer capacity is below one episode");
    agent_ = std::make_unique<SacAgent>(spec_.d_s, spec_.d_a, config_.sac, init_rng_);
    rew_opt_ = Adam(reward_.mlp().parameters(), AdamConfig{.lr = config_.model_lr});
    dyn_opt_ = Adam(dyn_.mlp().parameters(), AdamConfig{.lr = config_.model_lr});
    cau_opt_ = Adam(logits_.parameters(), AdamConfig{.lr = config_.mask_lr});
    refresh_policy_mask();
    state_ = env_.reset();
    current_.states.push_back(state_);
}

MaskVector Trainer::policy_mask() const { return policy_mask_; }

void Trainer::refresh_policy_mask()
{
    if (config_.variant != Variant::Grd) {
        policy_mask_ = MaskVector::Ones(spec_.d_s);
        return;
    }
    const MaskSample det = deterministic_masks();
    policy_mask_ = compact_representation(det.ss, det.sr, config_.closure);
}

Policy Trainer::eval_policy() const
{
    const Actor* actor = &agent_->actor();
    const Eigen::VectorXd keep = policy_mask_.cast<double>();
    return [actor, keep](const Vector& s) {
        Rng unused(0);
        return actor->act(s.cwiseProduct(keep), ActMode::Mean, unused);
    };
}

Relabeler Trainer::relabeler() const
{
    const RewardNet* net = &reward_;
    const MaskSample masks = deterministic_masks();
    const Variant variant = config_.variant;
    return [net, masks, variant](const Trajectory& tr) { return relabel_trajectory(tr, *net, masks, variant); };
}

void Trainer::collect_step()
{
    Vector a;
    if (buffer_.steps() < config_.warmup) {
        a.resize(spec_.d_a);
        for (int k = 0; k < spec_.d_a; ++k) a(k) = explore_rng_.uniform(-1.0, 1.0);
    } else {
        a = agent_->actor().act(state_.cwiseProduct(policy_mask_.cast<double>()), ActMode::Stochastic, explore_rng_);
    }
    StepResult res = env_.step(a);
    current_.actions.push_back(a.cwiseMax(-1.0).cwiseMin(1.0));
    current_.observed.push_back(res.observed_reward);
    current_.true_rewards.push_back(env_.last_true_reward());
    current_.ret += std::pow(spec_.gamma, static_cast<double>(current_.length() - 1)) * res.observed_reward;
    current_.states.push_back(res.next_state);
    state_ = res.next_state;
    ++env_steps_;
    if (res.done) {
        buffer_.add(std::move(current_));
        current_ = Trajectory{};
        state_ = env_.reset();
        current_.states.push_back(state_);
    }
}

void Trainer::train_batch()
{
    const auto d1 = buffer_.sample_trajectories(config_.trajectory_batch, buffer_rng_);
    const auto d2 = buffer_.sample_transitions(config_.transition_batch, buffer_rng_);
    if (config_.variant != Variant::UniformBaseline) {
        Tape tape;
        MaskLogitVars lv = bind_logits(tape, logits_);
        Var l_rew = reward_loss(tape, d1, reward_, lv, config_.temperature, spec_.gamma, gumbel_rng_);
        Var l_dyn = dynamics_loss(tape, d2, dyn_, lv, config_.temperature, gumbel_rng_);
        Var l_sp = sparsity_loss(tape, lv, spec_.d_s, config_.lambda);
        Var total = ad::add(ad::add(l_rew, l_dyn), l_sp);
        if (!std::isfinite(total.scalar())) throw NumericError("training diverged: non-finite model loss");
        rew_opt_.zero_grad();
        dyn_opt_.zero_grad();
        cau_opt_.zero_grad();
        tape.backward(total);
        rew_opt_.step();
        dyn_opt_.step();
        cau_opt_.step();
        refresh_policy_mask();
    }
    const SacBatch batch = relabel(d2, reward_, deterministic_masks(), policy_mask_, config_.variant,
                                   config_.sac.terminal_at_horizon);
    const SacLosses losses = agent_->update(batch, sac_rng_);
    if (!std::isfinite(losses.critic) || !std::isfinite(losses.actor) || !std::isfinite(losses.temperature))
        throw NumericError("training diverged: non-finite policy loss");
    ++gradient_steps_;
}

MetricsRecord Trainer::evaluate_now()
{
    MetricsRecord r;
    r.step = env_steps_;
    r.gradient_steps = gradient_steps_;
    const Policy policy = eval_policy();
    r.avg_return = average_return(eval_env_, policy, config_.eval_rollouts);
    r.pearson_r = reward_correlation(eval_env_, policy, relabeler(),
                                     static_cast<long>(config_.eval_rollouts) * spec_.horizon);
    const MaskSample det = deterministic_masks();
    if (buffer_.size() > 0) {
        const auto d1 = buffer_.sample_trajectories(kMetricTrajectories, metrics_rng_);
        const auto d2 = buffer_.sample_transitions(kMetricTransitions, metrics_rng_);
        Tape tape;
        r.l_rew = reward_loss(tape, d1, reward_, det, spec_.gamma).scalar();
        r.l_dyn = dynamics_loss(tape, d2, dyn_, det).scalar();
    } else {
        r.l_rew = r.l_dyn = std::nan("");
    }
    r.l_sp = sparsity_loss(logits_, config_.lambda);
    r.s_zr = sparsity_rate(det.sr);
    r.s_zr_sample = sparsity_rate(sample_training(logits_, config_.temperature, metrics_rng_).sr);
    const StructureScore score = structure_score(edge_probabilities(logits_), spec_);
    r.f1_sr = score.reward().f1();
    r.f1_ss = score.dynamics().f1();
    return r;
}

void Trainer::run(const std::function<void(const MetricsRecord&)>& on_record)
{
    const auto start = std::chrono::steady_clock::now();
    for (int epoch = 0; epoch < config_.epochs; ++epoch) {
        for (int cycle = 0; cycle < config_.cycles; ++cycle) {
            for (int it = 0; it < config_.iterations; ++it) {
                for (int k = 0; k < config_.steps_per_iteration; ++k) {
                    collect_step();
                    if (config_.train_batches > 0 || buffer_.steps() < config_.warmup) continue;
                    update_credit_ += config_.update_ratio;
                    while (update_credit_ >= 1.0) {
                        train_batch();
                        update_credit_ -= 1.0;
                    }
                }
                if (config_.train_batches > 0 && buffer_.steps() >= config_.warmup)
                    for (int b = 0; b < config_.train_batches; ++b) train_batch();
            }
            MetricsRecord r = evaluate_now();
            r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            records_.push_back(r);
            last_good_ = checkpoint();
            if (on_record) on_record(r);
        }
    }
}

ParameterRefs Trainer::all_parameters()
{
    ParameterRefs out = logits_.parameters();
    for (auto* p : reward_.mlp().parameters()) out.push_back(p);
    for (auto* p : dyn_.mlp().parameters()) out.push_back(p);
    for (auto* p : agent_->actor().mlp().parameters()) out.push_back(p);
    for (auto* p : agent_->critic().parameters()) out.push_back(p);
    out.push_back(&agent_->temperature().log_alpha);
    return out;
}

Checkpoint Trainer::checkpoint() const
{
    auto& self = const_cast<Trainer&>(*this);
    Checkpoint ck;
    ck.tensors = snapshot(self.all_parameters());
    for (auto& t : snapshot(self.agent_->target_critic().parameters()))
        ck.tensors.push_back({"target." + t.name, std::move(t.value)});
    ck.meta = manifest();
    return ck;
}

void Trainer::restore(const Checkpoint& ckpt)
{
    restore_parameters(ckpt, all_parameters());
    for (auto* p : agent_->target_critic().parameters()) p->value = ckpt.get("target." + p->name);
    refresh_policy_mask();
}

nlohmann::json Trainer::manifest() const
{
    nlohmann::json config = nlohmann::json::object();
    for (const auto& [k, v] : config_.to_map()) config[k] = v;
    return {{"config", config},
            {"config_hash", config_.hash()},
            {"seed", config_.seed},
            {"variant", to_string(config_.variant)},
            {"env", env_spec_to_json(spec_)},
            {"env_steps", env_steps_},
            {"gradient_steps", gradient_steps_}};
}

void Trainer::write_outputs(const std::filesystem::path& dir) const
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    write_metrics_csv(dir / "metrics.csv", records_);
    {
        std::ofstream aux(dir / "metrics_aux.csv", std::ios::trunc);
        if (!aux) throw IoError("cannot write metrics_aux.csv");
        aux << "step,gradient_steps,s_zr_sample,wall_seconds\n";
        for (const auto& r : records_)
            aux << r.step << ',' << r.gradient_steps << ',' << csv_number(r.s_zr_sample) << ','
                << csv_number(r.wall_seconds) << '\n';
    }
    {
        std::ofstream m(dir / "run.json", std::ios::trunc);
        if (!m) throw IoError("cannot write run.json");
        m << manifest().dump(2) << '\n';
    }
    save_checkpoint(dir / "checkpoint", checkpoint());
}

std::vector<MetricsRecord> run_training(const RunConfig& config, const std::optional<std::filesystem::path>& out_dir,
                                        const std::function<void(const MetricsRecord&)>& on_record)
{
    config.validate();
    Trainer trainer(config, make_env_spec(config));
    try {
        trainer.run(on_record);
    } catch (const NumericError&) {
        if (out_dir) {
            std::filesystem::create_directories(*out_dir);
            write_metrics_csv(*out_dir / "metrics.csv", trainer.records());
            if (trainer.last_good()) save_checkpoint(*out_dir / "checkpoint", *trainer.last_good());
        }
        throw;
    }
    if (out_dir) trainer.write_outputs(*out_dir);
    return trainer.records();
}

}  // namespace retdecomp
