#pragma once

#include "retdecomp/svg.hpp"
#include "retdecomp/trainer.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace retdecomp {

/// Config, env and weights recorded in a checkpoint written by a Trainer.
RunConfig config_from_checkpoint(const Checkpoint& ckpt);
EnvSpec env_from_checkpoint(const Checkpoint& ckpt);
std::unique_ptr<Trainer> trainer_from_checkpoint(const Checkpoint& ckpt);

nlohmann::json confusion_json(const Confusion& c);
nlohmann::json probabilities_json(const EdgeProbabilities& p);

/// Average oracle return, reward correlation, S_zr and structure scores of
/// the checkpoint's policy and model on `env`.
nlohmann::json evaluate_checkpoint(const Checkpoint& ckpt, const EnvSpec& env, int n_rollouts, std::uint64_t seed);

/// mask_ss.svg, mask_as.svg, mask_sr.svg, mask_ar.svg, reward_comparison.svg
/// and probabilities.json; learning_curve.svg too when `metrics_csv` exists.
void render_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& out_dir,
                       const std::optional<std::filesystem::path>& metrics_csv = std::nullopt);

struct SweepRow {
    std::string value;
    std::uint64_t seed = 0;
    long step = 0;
    double avg_return = 0.0;
    double s_zr = 0.0;
};

/// Short names ("lambda1") map to their config key ("model.lambda1").
std::string resolve_param(const std::string& param);

/// Trains once per (value, seed) and keeps every evaluation point.
std::vector<SweepRow> run_sweep(const RunConfig& base, const std::string& param, const std::vector<std::string>& values,
                                const std::vector<std::uint64_t>& seeds,
                                const std::optional<std::filesystem::path>& out_dir,
                                const std::function<void(const SweepRow&)>& on_row = {});

void write_sweep_csv(const std::filesystem::path& path, const std::string& param, std::span<const SweepRow> rows);
/// One line per value, one column per evaluation step: "mean ± std (S_zr)".
std::string sweep_table_markdown(const std::string& param, std::span<const SweepRow> rows);

}  // namespace retdecomp
