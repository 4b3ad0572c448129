#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "vmin/data/dataset.hpp"
#include "vmin/data/normalize.hpp"
#include "vmin/model/net.hpp"

namespace vmin {

inline constexpr int kCheckpointFormatVersion = 1;

struct TrainMeta {
    std::uint64_t seed = 0;
    std::int64_t epochs = 0;
    double final_loss = 0.0;
    std::string target_mode = "multi";  // "multi" or "average"

    bool operator==(const TrainMeta&) const = default;
};

/// Self-describing snapshot of a trained model: config, parameter blocks
/// keyed by layer name with explicit shapes and row-major value arrays,
/// the normalization stats and group spec it was trained with, and
/// training metadata. Round-trips bit-exactly.
struct Checkpoint {
    int format_version = kCheckpointFormatVersion;
    VminNet net;
    NormStats norm;
    GroupSpec groups;
    TrainMeta meta;
};

void save_checkpoint(const Checkpoint& ckpt, std::ostream& sink);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

/// Validates format_version (VersionError), stored shapes against the
/// config (IntegrityError naming the block) and raises ParseError on
/// malformed or truncated input.
Checkpoint load_checkpoint(std::istream& source);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace vmin
