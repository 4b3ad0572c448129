#include "vmin/data/normalize.hpp"

#include "vmin/errors.hpp"

namespace vmin {

NormStats fit_minmax(const FeatureMatrix& features, const std::vector<Index>& rows) {
    if (rows.empty()) throw ArgumentError("fit_minmax requires a nonempty row subset");
    const Index m = features.values.cols();
    NormStats stats;
    stats.column_names = features.column_names;
    stats.col_min.resize(m);
    stats.col_max.resize(m);
    for (Index j = 0; j < m; ++j) {
        double lo = features.values(rows.front(), j);
        double hi = lo;
        for (Index r : rows) {
            const double v = features.values(r, j);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        stats.col_min[j] = lo;
        stats.col_max[j] = hi;
    }
    stats.degenerate.resize(static_cast<std::size_t>(m));
    for (Index j = 0; j < m; ++j) {
        stats.degenerate[static_cast<std::size_t>(j)] = stats.col_max[j] == stats.col_min[j];
    }
    return stats;
}

NormStats fit_minmax(const FeatureMatrix& features) {
    std::vector<Index> rows(static_cast<std::size_t>(features.values.rows()));
    for (Index i = 0; i < features.values.rows(); ++i) rows[static_cast<std::size_t>(i)] = i;
    return fit_minmax(features, rows);
}

FeatureMatrix apply_minmax(const FeatureMatrix& features, const NormStats& stats) {
    if (features.values.cols() != stats.column_count()) {
        throw DimensionError("apply_minmax: feature count " + std::to_string(features.values.cols()) +
                             " does not match stats column count " +
                             std::to_string(stats.column_count()));
    }
    FeatureMatrix out = features;
    for (Index j = 0; j < stats.column_count(); ++j) {
        if (stats.degenerate[static_cast<std::size_t>(j)]) {
            out.values.col(j).setZero();
        } else {
            const double span = stats.col_max[j] - stats.col_min[j];
            out.values.col(j) = (features.values.col(j).array() - stats.col_min[j]) / span;
        }
    }
    return out;
}

}  // namespace vmin
