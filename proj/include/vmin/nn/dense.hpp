#pragma once

#include <string>

#include "vmin/rng.hpp"
#include "vmin/types.hpp"

namespace vmin {

enum class Activation { Identity, LeakyRelu };

/// A fully-connected layer y = act(W x + b) with weight stored out x in.
struct DenseLayer {
    Matrix weight;  // out x in
    Vector bias;    // out
    Activation activation = Activation::Identity;
    double leaky_slope = 0.01;

    Index in_features() const { return weight.cols(); }
    Index out_features() const { return weight.rows(); }
    Index parameter_count() const { return weight.size() + bias.size(); }
};

/// Allocates a layer with uniform Glorot weights in
/// [-sqrt(6/(in+out)), +sqrt(6/(in+out))] and zero biases.
DenseLayer make_dense_layer(Index in_features, Index out_features, Activation activation,
                            double leaky_slope, Rng& rng);

/// Activations cached by the forward pass for an exact backward pass.
struct DenseCache {
    Matrix input;           // batch x in
    Matrix pre_activation;  // batch x out
};

struct DenseGrads {
    Matrix weight;  // out x in
    Vector bias;    // out
    Matrix input;   // batch x in
};

/// Row-wise forward pass over a batch: out[b] = act(W x[b] + b).
Matrix dense_forward(const DenseLayer& layer, MatrixRef x);

/// Forward pass that also records the cache consumed by dense_backward.
Matrix dense_forward(const DenseLayer& layer, MatrixRef x, DenseCache& cache);

/// Analytic gradients of sum(upstream .* output) w.r.t. weight, bias, input.
DenseGrads dense_backward(const DenseLayer& layer, const DenseCache& cache, MatrixRef upstream);

/// Convenience overload that recomputes the forward cache from x.
DenseGrads dense_backward(const DenseLayer& layer, MatrixRef x, MatrixRef upstream);

}  // namespace vmin
