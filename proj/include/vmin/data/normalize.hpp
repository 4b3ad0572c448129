#pragma once

#include <string>
#include <vector>

#include "vmin/data/dataset.hpp"
#include "vmin/types.hpp"

namespace vmin {

/// Per-column min/max fitted on a chosen row subset. Columns where
/// max == min are flagged degenerate and normalize to 0.
struct NormStats {
    std::vector<std::string> column_names;
    Vector col_min;
    Vector col_max;
    std::vector<bool> degenerate;

    Index column_count() const { return col_min.size(); }
    bool operator==(const NormStats&) const = default;
};

/// Fits stats over exactly the given rows (typically the training split).
NormStats fit_minmax(const FeatureMatrix& features, const std::vector<Index>& rows);

/// Fits stats over all rows.
NormStats fit_minmax(const FeatureMatrix& features);

/// (x - min) / (max - min) per column; degenerate columns map to 0.
/// Values outside the fitted range are allowed and map outside [0, 1].
FeatureMatrix apply_minmax(const FeatureMatrix& features, const NormStats& stats);

}  // namespace vmin
