#pragma once

#include "vmin/types.hpp"

namespace vmin {

struct MseResult {
    double loss = 0.0;
    Matrix grad;  // d loss / d pred, same shape as pred
};

/// Mean squared error over every entry: (1/(n*o)) * sum((pred - target)^2),
/// with gradient 2 (pred - target) / (n*o).
MseResult mse_loss(MatrixRef pred, MatrixRef target);

}  // namespace vmin
