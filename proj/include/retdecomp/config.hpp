#pragma once

#include "retdecomp/causal_masks.hpp"
#include "retdecomp/factored_env.hpp"
#include "retdecomp/policy.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace retdecomp {

enum class Variant { Grd, GrdNoCr, UniformBaseline };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);

/// Everything a training run depends on. Keys are addressed as
/// "section.key", matching the INI layout documented in the README.
struct RunConfig {
    // [run]
    std::uint64_t seed = 0;
    Variant variant = Variant::Grd;

    // [env]
    std::string env_preset = "generated";  // generated | distractor | chain | file
    std::string env_file;
    std::int64_t env_seed = -1;      // -1: use run.seed
    int env_d_s = 6;
    int env_d_a = 2;
    double env_density = 0.3;
    std::string env_dynamics = "linear";
    int env_horizon = 64;
    std::string env_observe = "episodic";
    int env_observe_k = 1;
    double env_noise = 0.0;
    double env_action_cost = 0.1;
    int env_chain_length = 4;

    // [model]
    int model_hidden = 64;
    bool dyn_dim_embedding = true;
    double temperature = 1.0;
    Closure closure = Closure::OneStep;
    SparsityWeights lambda{};
    double model_lr = 3e-4;
    double mask_lr = 3e-4;

    // [policy]
    SacConfig sac{};

    // [schedule]
    int epochs = 1;
    int cycles = 20;
    int iterations = 25;
    int steps_per_iteration = 100;
    /// Gradient batches per collected env step. Fractions accumulate.
    double update_ratio = 1.0;
    /// When > 0, overrides update_ratio with this many batches per iteration.
    int train_batches = 0;
    long warmup = 10000;
    long buffer_capacity = 1000000;
    int trajectory_batch = 4;     // M
    int transition_batch = 256;   // N
    int eval_rollouts = 10;

    long total_steps() const
    {
        return static_cast<long>(epochs) * cycles * iterations * steps_per_iteration;
    }
    long eval_interval() const { return static_cast<long>(iterations) * steps_per_iteration; }

    /// Throws ConfigError on out-of-range values.
    void validate() const;

    /// Sets one key ("model.lambda1", "run.seed", ...). Unknown keys and
    /// unparsable values raise ConfigError.
    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;
    static const std::vector<std::string>& keys();

    /// Canonical "section.key -> value" listing in key order.
    std::map<std::string, std::string> to_map() const;
    /// Canonical INI text; the config hash is taken over this.
    std::string to_ini() const;
    /// Git-style blob SHA-1 of to_ini().
    std::string hash() const;

    /// Named presets: "desk", "distractor", "full".
    static RunConfig preset(const std::string& name);
};

/// Parses INI text. A top-level `preset = name` (or [run] preset) selects the
/// starting point; every other key overrides it.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Builds the environment spec the config describes.
EnvSpec make_env_spec(const RunConfig& config);

}  // namespace retdecomp
