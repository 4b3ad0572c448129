#pragma once

#include <cstdint>
#include <vector>

#include "vmin/types.hpp"

namespace vmin {

struct SplitIndices {
    std::vector<Index> train;
    std::vector<Index> test;
};

/// Deterministic shuffled split. Train size = round(fraction * n); the two
/// halves are disjoint and exhaustive. Throws ArgumentError unless
/// 0 < train_fraction < 1.
SplitIndices split_rows(Index n_rows, double train_fraction, std::uint64_t seed);

}  // namespace vmin
