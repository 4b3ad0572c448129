#include "vmin/metrics.hpp"

#include <cmath>

#include "vmin/errors.hpp"

namespace vmin {

double pooled_rmse(MatrixRef pred, MatrixRef actual) {
    if (pred.rows() != actual.rows() || pred.cols() != actual.cols()) {
        throw DimensionError("pooled_rmse: shape mismatch");
    }
    const Matrix diff = pred - actual;
    return std::sqrt(diff.squaredNorm() / static_cast<double>(diff.size()));
}

std::vector<double> per_pattern_rmse(MatrixRef pred, MatrixRef actual) {
    if (pred.rows() != actual.rows() || pred.cols() != actual.cols()) {
        throw DimensionError("per_pattern_rmse: shape mismatch");
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(pred.cols()));
    for (Index j = 0; j < pred.cols(); ++j) {
        const Vector diff = pred.col(j) - actual.col(j);
        out.push_back(std::sqrt(diff.squaredNorm() / static_cast<double>(diff.size())));
    }
    return out;
}

}  // namespace vmin
