#include "vmin/data/split.hpp"

#include <cmath>

#include "vmin/errors.hpp"
#include "vmin/rng.hpp"

namespace vmin {

SplitIndices split_rows(Index n_rows, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ArgumentError("train_fraction must lie strictly between 0 and 1");
    }
    if (n_rows < 2) throw ArgumentError("split needs at least two rows");

    std::vector<Index> order(static_cast<std::size_t>(n_rows));
    for (Index i = 0; i < n_rows; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng rng(mix_seed(seed, stream_tag("split")));
    rng.shuffle(order);

    auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(n_rows)));
    n_train = std::min(std::max<std::size_t>(n_train, 1), order.size() - 1);

    SplitIndices out;
    out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    return out;
}

}  // namespace vmin
