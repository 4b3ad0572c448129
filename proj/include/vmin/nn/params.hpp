#pragma once

#include <string>
#include <vector>

#include "vmin/types.hpp"

namespace vmin {

/// Parameter partition used for freezing and transfer.
enum class Block { Fusion, Embedding, Hidden, Output };

std::string block_name(Block block);

/// Flat view over one parameter tensor (a weight matrix or a bias vector).
/// Non-owning; valid while the underlying layer is alive.
struct ParamView {
    std::string name;  // e.g. "fusion_0.weight", "hidden_1.bias"
    Block block = Block::Hidden;
    double* data = nullptr;
    Index size = 0;

    Eigen::Map<Vector> vec() const { return {data, size}; }
};

/// Gradient storage aligned index-for-index with a list of ParamViews.
using GradList = std::vector<Vector>;

}  // namespace vmin
