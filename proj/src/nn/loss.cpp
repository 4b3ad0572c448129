#include "vmin/nn/loss.hpp"

#include <string>

#include "vmin/errors.hpp"

namespace vmin {

MseResult mse_loss(MatrixRef pred, MatrixRef target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw DimensionError("mse_loss shape mismatch: " + std::to_string(pred.rows()) + "x" +
                             std::to_string(pred.cols()) + " vs " + std::to_string(target.rows()) +
                             "x" + std::to_string(target.cols()));
    }
    if (pred.rows() < 1 || pred.cols() < 1) {
        throw DimensionError("mse_loss requires at least one row and one column");
    }
    const double scale = 1.0 / static_cast<double>(pred.size());
    Matrix diff = pred - target;
    MseResult result;
    result.loss = diff.squaredNorm() * scale;
    result.grad = 2.0 * scale * diff;
    return result;
}

}  // namespace vmin
