#pragma once

#include <vector>

#include "vmin/types.hpp"

namespace vmin {

/// Pooled RMSE over every (row, pattern) cell, in mV. The difference is
/// materialized before the reduction so every caller gets the identical
/// floating-point summation order.
double pooled_rmse(MatrixRef pred, MatrixRef actual);

/// Per-pattern (column-wise) RMSE, in mV.
std::vector<double> per_pattern_rmse(MatrixRef pred, MatrixRef actual);

}  // namespace vmin
