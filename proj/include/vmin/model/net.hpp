#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vmin/data/dataset.hpp"
#include "vmin/nn/dense.hpp"
#include "vmin/nn/params.hpp"
#include "vmin/types.hpp"

namespace vmin {

/// Architecture of one node's network. Group sizes come from the group
/// spec with legacy groups excluded.
struct ModelConfig {
    std::vector<Index> group_sizes;
    Index fused_per_group = 2;
    Index embedding_dim = 32;
    std::vector<Index> hidden_dims = {64, 16, 64};
    Index output_dim = 1;
    double leaky_slope = 0.01;

    void validate() const;  // ConfigError on bad dims
    Index input_dim() const;
    Index fused_dim() const;
    /// Closed-form total parameter count, sum of (out*in + out) per layer.
    Index parameter_count() const;

    bool operator==(const ModelConfig&) const = default;
};

/// Default architecture for a node's group layout and pattern count
/// (fused_per_group 2, embedding 32, hidden 64/16/64).
ModelConfig default_model_config(const GroupSpec& groups, Index output_dim);

/// The grouped-feature regressor: per-group affine fusion layers, one
/// leaky-ReLU embedding layer, a leaky-ReLU hidden chain, and an affine
/// output layer producing one value per pattern.
struct VminNet {
    ModelConfig config;
    std::vector<DenseLayer> fusion;
    DenseLayer embedding;
    std::vector<DenseLayer> hidden;
    DenseLayer output;

    Index layer_count() const { return static_cast<Index>(fusion.size() + hidden.size()) + 2; }
    /// Layers in canonical order: fusion_0.., embedding, hidden_0.., output.
    std::vector<const DenseLayer*> layers() const;
    std::vector<DenseLayer*> layers();
    std::string layer_name(std::size_t idx) const;
    Block layer_block(std::size_t idx) const;

    /// Flat views over every parameter tensor, canonical order
    /// (weight then bias per layer). Non-owning.
    std::vector<ParamView> param_views();
    Index parameter_count() const;
};

/// Seeded construction; bit-reproducible for identical config and seed.
VminNet build_model(const ModelConfig& config, std::uint64_t seed);

/// Column indices feeding each fusion layer, in group-spec order.
/// SchemaError if a group member column is missing from the features.
std::vector<std::vector<Index>> model_input_layout(const GroupSpec& groups,
                                                   const FeatureMatrix& features);

/// Gathers the model input block: group member columns concatenated in
/// group order.
Matrix assemble_model_input(const FeatureMatrix& normalized, const GroupSpec& groups);

/// Forward pass on an already-normalized feature matrix.
Matrix forward(const VminNet& net, const FeatureMatrix& normalized, const GroupSpec& groups);

/// Forward pass on a pre-assembled model input (columns in group order).
Matrix net_forward(const VminNet& net, MatrixRef x_model);

struct ForwardCache {
    std::vector<DenseCache> layer_caches;  // canonical layer order
    Matrix output;
};

ForwardCache net_forward_cached(const VminNet& net, MatrixRef x_model);

/// Parameter gradients aligned with param_views(); upstream is
/// d loss / d output.
GradList net_backward(const VminNet& net, const ForwardCache& cache, MatrixRef upstream);

/// Disjoint, exhaustive partition of param_views() by block.
std::map<Block, std::vector<ParamView>> partition_params(VminNet& net);

}  // namespace vmin
