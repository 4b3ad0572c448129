#include "vmin/nn/dense.hpp"

#include <cmath>

#include "vmin/errors.hpp"
#include "vmin/nn/activation.hpp"

namespace vmin {

namespace {

void check_forward_shapes(const DenseLayer& layer, MatrixRef x) {
    if (x.cols() != layer.weight.cols()) {
        throw DimensionError("dense layer expects " + std::to_string(layer.weight.cols()) +
                             " input features, got " + std::to_string(x.cols()));
    }
    if (layer.bias.size() != layer.weight.rows()) {
        throw DimensionError("dense layer bias length " + std::to_string(layer.bias.size()) +
                             " does not match weight rows " + std::to_string(layer.weight.rows()));
    }
}

Matrix apply_activation(const DenseLayer& layer, const Matrix& z) {
    switch (layer.activation) {
        case Activation::Identity:
            return z;
        case Activation::LeakyRelu:
            return leaky_relu(z, layer.leaky_slope);
    }
    throw ConfigError("unknown activation");
}

}  // namespace

DenseLayer make_dense_layer(Index in_features, Index out_features, Activation activation,
                            double leaky_slope, Rng& rng) {
    if (in_features < 1 || out_features < 1) {
        throw ConfigError("dense layer dimensions must be >= 1");
    }
    if (leaky_slope <= 0.0) {
        throw ConfigError("leaky slope must be > 0");
    }
    DenseLayer layer;
    layer.weight.resize(out_features, in_features);
    const double limit = std::sqrt(6.0 / static_cast<double>(in_features + out_features));
    for (Index i = 0; i < out_features; ++i) {
        for (Index j = 0; j < in_features; ++j) {
            layer.weight(i, j) = rng.uniform(-limit, limit);
        }
    }
    layer.bias = Vector::Zero(out_features);
    layer.activation = activation;
    layer.leaky_slope = leaky_slope;
    return layer;
}

Matrix dense_forward(const DenseLayer& layer, MatrixRef x) {
    check_forward_shapes(layer, x);
    Matrix z = (x * layer.weight.transpose()).rowwise() + layer.bias.transpose();
    return apply_activation(layer, z);
}

Matrix dense_forward(const DenseLayer& layer, MatrixRef x, DenseCache& cache) {
    check_forward_shapes(layer, x);
    cache.input = x;
    cache.pre_activation = (x * layer.weight.transpose()).rowwise() + layer.bias.transpose();
    return apply_activation(layer, cache.pre_activation);
}

DenseGrads dense_backward(const DenseLayer& layer, const DenseCache& cache, MatrixRef upstream) {
    if (upstream.rows() != cache.pre_activation.rows() ||
        upstream.cols() != cache.pre_activation.cols()) {
        throw DimensionError("upstream gradient shape does not match layer output");
    }
    Matrix dz;
    if (layer.activation == Activation::LeakyRelu) {
        dz = upstream.cwiseProduct(leaky_relu_derivative(cache.pre_activation, layer.leaky_slope));
    } else {
        dz = upstream;
    }
    DenseGrads grads;
    grads.weight = dz.transpose() * cache.input;
    grads.bias = dz.colwise().sum().transpose();
    grads.input = dz * layer.weight;
    return grads;
}

DenseGrads dense_backward(const DenseLayer& layer, MatrixRef x, MatrixRef upstream) {
    DenseCache cache;
    dense_forward(layer, x, cache);
    return dense_backward(layer, cache, upstream);
}

}  // namespace vmin
