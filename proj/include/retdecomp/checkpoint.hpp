#pragma once

#include "retdecomp/tensor.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace retdecomp {

struct NamedTensor {
    std::string name;
    Tensor value;
};

/// A checkpoint directory holds params.bin (the tensors back to back,
/// row-major little-endian float64) and manifest.json (format tag,
/// name/shape/offset per tensor, plus caller metadata under "meta").
struct Checkpoint {
    std::vector<NamedTensor> tensors;
    nlohmann::json meta;

    /// Throws UsageError when absent.
    const Tensor& get(const std::string& name) const;
};

inline constexpr const char* kCheckpointFormat = "retdecomp-checkpoint/1";

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

/// Copies tensors into parameters of matching name; every parameter must be
/// present with the same shape.
void restore_parameters(const Checkpoint& ckpt, const ParameterRefs& params);
std::vector<NamedTensor> snapshot(const ParameterRefs& params);

}  // namespace retdecomp
