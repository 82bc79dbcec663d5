#pragma once

#include "retdecomp/checkpoint.hpp"
#include "retdecomp/config.hpp"
#include "retdecomp/gen_model.hpp"
#include "retdecomp/metrics.hpp"

#include <deque>
#include <filesystem>
#include <functional>
#include <optional>

namespace retdecomp {

/// Completed trajectories, evicted oldest-first once the stored step count
/// would exceed the capacity.
class ReplayBuffer {
public:
    explicit ReplayBuffer(long capacity);

    void add(Trajectory traj);
    long steps() const { return steps_; }
    long capacity() const { return capacity_; }
    std::size_t size() const { return trajs_.size(); }
    const Trajectory& at(std::size_t i) const { return trajs_[i]; }

    /// D1: M trajectories, without replacement when at least M are stored.
    std::vector<const Trajectory*> sample_trajectories(int m, Rng& rng) const;
    /// D2: N transitions, each stored step equally likely.
    std::vector<Transition> sample_transitions(int n, Rng& rng) const;
    Transition transition(std::size_t traj, std::size_t t) const;

private:
    long capacity_;
    long steps_ = 0;
    std::deque<Trajectory> trajs_;
    std::vector<long> starts_;  // first global step index of each trajectory
};

/// Policy-side batch for the variant: proxy rewards and (compact) states.
SacBatch relabel(std::span<const Transition> batch, const RewardNet& reward, const MaskSample& masks,
                 const MaskVector& policy_mask, Variant variant, bool terminal_at_horizon);

/// Per-step proxy rewards of a whole trajectory under the variant's rule.
std::vector<double> relabel_trajectory(const Trajectory& traj, const RewardNet& reward, const MaskSample& masks,
                                       Variant variant);

struct MetricsRecord {
    long step = 0;
    double avg_return = 0.0;
    double l_rew = 0.0;
    double l_dyn = 0.0;
    double l_sp = 0.0;
    double s_zr = 0.0;         // deterministic c_sr
    double s_zr_sample = 0.0;  // one stochastic draw of c_sr
    double f1_sr = 0.0;        // reward masks (sr and ar)
    double f1_ss = 0.0;        // dynamics masks (ss and as)
    std::optional<double> pearson_r;
    long gradient_steps = 0;
    double wall_seconds = 0.0;
};

/// Column order of the metrics CSV.
inline constexpr const char* kMetricsHeader = "step,avg_return,l_rew,l_dyn,l_sp,s_zr,f1_sr,f1_ss,pearson_r";

std::string metrics_csv_row(const MetricsRecord& r);
void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRecord> records);
std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path);

class Trainer {
public:
    Trainer(RunConfig config, EnvSpec spec);
    Trainer(const Trainer&) = delete;
    Trainer& operator=(const Trainer&) = delete;

    /// Runs the whole schedule. `on_record` sees each record as it is made.
    void run(const std::function<void(const MetricsRecord&)>& on_record = {});
    /// One model + policy gradient batch (exposed for tests).
    void train_batch();
    void collect_step();
    MetricsRecord evaluate_now();

    const RunConfig& config() const { return config_; }
    const EnvSpec& spec() const { return spec_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    const std::vector<MetricsRecord>& records() const { return records_; }
    long env_steps() const { return env_steps_; }
    long gradient_steps() const { return gradient_steps_; }

    MaskLogits& logits() { return logits_; }
    const MaskLogits& logits() const { return logits_; }
    RewardNet& reward_net() { return reward_; }
    const RewardNet& reward_net() const { return reward_; }
    DynNet& dyn_net() { return dyn_; }
    SacAgent& agent() { return *agent_; }

    MaskSample deterministic_masks() const { return sample_deterministic(logits_); }
    /// c^{s->pi} for grd, all ones otherwise.
    MaskVector policy_mask() const;
    Policy eval_policy() const;
    Relabeler relabeler() const;

    Checkpoint checkpoint() const;
    /// Snapshot taken at the most recent evaluation point.
    const std::optional<Checkpoint>& last_good() const { return last_good_; }
    void restore(const Checkpoint& ckpt);
    nlohmann::json manifest() const;

    /// CSV, auxiliary CSV, manifest and final checkpoint under `dir`.
    void write_outputs(const std::filesystem::path& dir) const;

private:
    ParameterRefs all_parameters();
    void refresh_policy_mask();

    RunConfig config_;
    EnvSpec spec_;
    Rng init_rng_, explore_rng_, gumbel_rng_, buffer_rng_, sac_rng_, metrics_rng_;
    FactoredEnv env_;
    FactoredEnv eval_env_;
    ReplayBuffer buffer_;
    MaskLogits logits_;
    RewardNet reward_;
    DynNet dyn_;
    std::unique_ptr<SacAgent> agent_;
    Adam rew_opt_, dyn_opt_, cau_opt_;
    MaskVector policy_mask_;

    Trajectory current_;
    Vector state_;
    long env_steps_ = 0;
    long gradient_steps_ = 0;
    double update_credit_ = 0.0;
    std::vector<MetricsRecord> records_;
    std::optional<Checkpoint> last_good_;
};

/// Builds the env, trains, and writes outputs when `out_dir` is given. On
/// divergence the last good checkpoint is written before rethrowing.
std::vector<MetricsRecord> run_training(const RunConfig& config, const std::optional<std::filesystem::path>& out_dir,
                                        const std::function<void(const MetricsRecord&)>& on_record = {});

}  // namespace retdecomp
