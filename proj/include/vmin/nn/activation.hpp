#pragma once

#include <Eigen/Dense>

namespace vmin {

/// Elementwise Leaky ReLU: x for x >= 0, slope * x otherwise.
/// Returns an Eigen expression, so it composes without temporaries.
template <typename Derived>
auto leaky_relu(const Eigen::MatrixBase<Derived>& x, double slope) {
    return x.unaryExpr([slope](double v) { return v >= 0.0 ? v : slope * v; });
}

/// Derivative of Leaky ReLU. The kink at exactly 0 is assigned slope 1.
template <typename Derived>
auto leaky_relu_derivative(const Eigen::MatrixBase<Derived>& x, double slope) {
    return x.unaryExpr([slope](double v) { return v >= 0.0 ? 1.0 : slope; });
}

}  // namespace vmin
