#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "svskit/networks.hpp"
#include "svskit/train.hpp"

namespace svskit {

/// Training state snapshot. On disk this reuses the tensor container: the
/// "EMB1" magic, a length-prefixed JSON manifest describing stage, counters
/// and the tensor directory, then one float32 tensor record per entry in
/// manifest order (parameter values first, then optimizer moments).
struct Checkpoint {
    std::string stage;           // "aux" or "denoiser"
    std::uint64_t iteration = 0;
    std::uint64_t seed = 0;
    std::uint64_t optimizer_step = 0;
    std::vector<std::string> names;
    std::unordered_map<std::string, TensorData> values;
    std::unordered_map<std::string, TensorData> adam_m;
    std::unordered_map<std::string, TensorData> adam_v;
};

Checkpoint snapshot_checkpoint(const nn::ParamStore& params, const nn::AdamW* optimizer,
                               const std::string& stage, std::uint64_t iteration,
                               std::uint64_t seed);

/// Copies values (and optimizer state when present) back into a model whose
/// parameter names and shapes must match the snapshot.
void restore_checkpoint(const Checkpoint& ckpt, nn::ParamStore& params, nn::AdamW* optimizer);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

} // namespace svskit
