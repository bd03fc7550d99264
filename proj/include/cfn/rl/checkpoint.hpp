#pragma once

#include <cstdint>
#include <string>

#include "cfn/rl/net.hpp"

namespace cfn::rl {

// Binary checkpoint: magic, layer shape, config hash, then the parameters as
// little-endian 64-bit floats. Round-trips bit-exactly.
void save_checkpoint(const ActorCritic& net, std::uint64_t config_hash,
                     const std::string& path);

struct LoadedCheckpoint {
    ActorCritic net;
    std::uint64_t config_hash = 0;
};

// Throws std::runtime_error on a missing, truncated or malformed file.
LoadedCheckpoint load_checkpoint(const std::string& path);

// FNV-1a, used to fingerprint the configuration a checkpoint was trained
// under so mismatched loads can be flagged.
std::uint64_t fnv1a_hash(const std::string& text);

} // namespace cfn::rl
