#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "relief/learning/linear.hpp"
#include "relief/learning/mlp.hpp"

namespace relief {

inline constexpr int kCheckpointVersion = 1;

/// Trained value function as stored on disk. Exactly one of `linear` and
/// `mlp` is set.
struct Checkpoint {
    std::string method;    // "dl-vfa" or "nn-vfa"
    std::string instance;  // instance name the policy was trained on
    std::uint64_t seed = 0;
    int episodes = 0;      // training episodes completed
    bool truncated = false;
    std::optional<LinearVFA> linear;
    std::optional<MlpVFA> mlp;

    bool operator==(const Checkpoint&) const = default;
};

std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace relief
