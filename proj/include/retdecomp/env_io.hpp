#pragma once

#include "retdecomp/factored_env.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>

namespace retdecomp {

nlohmann::json env_spec_to_json(const EnvSpec& spec);
EnvSpec env_spec_from_json(const nlohmann::json& j);

void save_env_spec(const EnvSpec& spec, const std::filesystem::path& path);
EnvSpec load_env_spec(const std::filesystem::path& path);

/// One JSON object per step: {"t", "state", "action", "o", "r"}, where r is
/// the oracle (realised) reward.
void write_trajectory_jsonl(const Trajectory& traj, std::ostream& out);

}  // namespace retdecomp
