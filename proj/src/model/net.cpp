#include "vmin/model/net.hpp"

#include <numeric>

#include "vmin/errors.hpp"

namespace vmin {

void ModelConfig::validate() const {
    if (group_sizes.empty()) throw ConfigError("model needs at least one feature group");
    for (Index m : group_sizes) {
        if (m < 1) throw ConfigError("every group must contain at least one feature");
    }
    if (fused_per_group < 1) throw ConfigError("fused_per_group must be >= 1");
    if (embedding_dim < 1) throw ConfigError("embedding_dim must be >= 1");
    for (Index h : hidden_dims) {
        if (h < 1) throw ConfigError("hidden dims must be >= 1");
    }
    if (output_dim < 1) throw ConfigError("output_dim must be >= 1");
    if (leaky_slope <= 0.0) throw ConfigError("leaky_slope must be > 0");
}

Index ModelConfig::input_dim() const {
    return std::accumulate(group_sizes.begin(), group_sizes.end(), Index{0});
}

Index ModelConfig::fused_dim() const {
    return fused_per_group * static_cast<Index>(group_sizes.size());
}

Index ModelConfig::parameter_count() const {
    auto dense = [](Index in, Index out) { return out * in + out; };
    Index total = 0;
    for (Index m : group_sizes) total += dense(m, fused_per_group);
    Index in = fused_dim();
    total += dense(in, embedding_dim);
    in = embedding_dim;
    for (Index h : hidden_dims) {
        total += dense(in, h);
        in = h;
    }
    total += dense(in, output_dim);
    return total;
}

ModelConfig default_model_config(const GroupSpec& groups, Index output_dim) {
    ModelConfig config;
    config.group_sizes = groups.model_group_sizes();
    config.output_dim = output_dim;
    config.validate();
    return config;
}

std::vector<const DenseLayer*> VminNet::layers() const {
    std::vector<const DenseLayer*> out;
    for (const DenseLayer& l : fusion) out.push_back(&l);
    out.push_back(&embedding);
    for (const DenseLayer& l : hidden) out.push_back(&l);
    out.push_back(&output);
    return out;
}

std::vector<DenseLayer*> VminNet::layers() {
    std::vector<DenseLayer*> out;
    for (DenseLayer& l : fusion) out.push_back(&l);
    out.push_back(&embedding);
    for (DenseLayer& l : hidden) out.push_back(&l);
    out.push_back(&output);
    return out;
}

std::string VminNet::layer_name(std::size_t idx) const {
    const std::size_t g = fusion.size();
    if (idx < g) return "fusion_" + std::to_string(idx);
    if (idx == g) return "embedding";
    if (idx < g + 1 + hidden.size()) return "hidden_" + std::to_string(idx - g - 1);
    return "output";
}

Block VminNet::layer_block(std::size_t idx) const {
    const std::size_t g = fusion.size();
    if (idx < g) return Block::Fusion;
    if (idx == g) return Block::Embedding;
    if (idx < g + 1 + hidden.size()) return Block::Hidden;
    return Block::Output;
}

std::vector<ParamView> VminNet::param_views() {
    std::vector<ParamView> views;
    auto ls = layers();
    for (std::size_t i = 0; i < ls.size(); ++i) {
        const std::string name = layer_name(i);
        const Block block = layer_block(i);
        views.push_back({name + ".weight", block, ls[i]->weight.data(), ls[i]->weight.size()});
        views.push_back({name + ".bias", block, ls[i]->bias.data(), ls[i]->bias.size()});
    }
    return views;
}

Index VminNet::parameter_count() const {
    Index total = 0;
    for (const DenseLayer* l : layers()) total += l->parameter_count();
    return total;
}

VminNet build_model(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(mix_seed(seed, stream_tag("init")));
    VminNet net;
    net.config = config;
    for (Index m : config.group_sizes) {
        net.fusion.push_back(
            make_dense_layer(m, config.fused_per_group, Activation::Identity, config.leaky_slope, rng));
    }
    net.embedding = make_dense_layer(config.fused_dim(), config.embedding_dim,
                                     Activation::LeakyRelu, config.leaky_slope, rng);
    Index in = config.embedding_dim;
    for (Index h : config.hidden_dims) {
        net.hidden.push_back(make_dense_layer(in, h, Activation::LeakyRelu, config.leaky_slope, rng));
        in = h;
    }
    net.output = make_dense_layer(in, config.output_dim, Activation::Identity, config.leaky_slope, rng);
    return net;
}

std::vector<std::vector<Index>> model_input_layout(const GroupSpec& groups,
                                                   const FeatureMatrix& features) {
    std::vector<std::vector<Index>> layout;
    for (const FeatureGroup& g : groups.model_groups()) {
        std::vector<Index> cols;
        cols.reserve(g.columns.size());
        for (const std::string& c : g.columns) cols.push_back(features.column_index(c));
        layout.push_back(std::move(cols));
    }
    if (layout.empty()) throw SchemaError("group spec has no model-input groups");
    return layout;
}

Matrix assemble_model_input(const FeatureMatrix& normalized, const GroupSpec& groups) {
    const auto layout = model_input_layout(groups, normalized);
    Index width = 0;
    for (const auto& cols : layout) width += static_cast<Index>(cols.size());
    Matrix x(normalized.values.rows(), width);
    Index at = 0;
    for (const auto& cols : layout) {
        for (Index c : cols) x.col(at++) = normalized.values.col(c);
    }
    return x;
}

Matrix forward(const VminNet& net, const FeatureMatrix& normalized, const GroupSpec& groups) {
    return net_forward(net, assemble_model_input(normalized, groups));
}

namespace {

void check_model_input(const VminNet& net, MatrixRef x) {
    if (x.cols() != net.config.input_dim()) {
        throw DimensionError("model input has " + std::to_string(x.cols()) +
                             " columns, expected " + std::to_string(net.config.input_dim()));
    }
}

}  // namespace

Matrix net_forward(const VminNet& net, MatrixRef x_model) {
    check_model_input(net, x_model);
    const Index k = net.config.fused_per_group;
    Matrix fused(x_model.rows(), net.config.fused_dim());
    Index offset = 0;
    for (std::size_t i = 0; i < net.fusion.size(); ++i) {
        const Index m = net.config.group_sizes[i];
        fused.middleCols(static_cast<Index>(i) * k, k) =
            dense_forward(net.fusion[i], x_model.middleCols(offset, m));
        offset += m;
    }
    Matrix h = dense_forward(net.embedding, fused);
    for (const DenseLayer& layer : net.hidden) h = dense_forward(layer, h);
    return dense_forward(net.output, h);
}

ForwardCache net_forward_cached(const VminNet& net, MatrixRef x_model) {
    check_model_input(net, x_model);
    const Index k = net.config.fused_per_group;
    ForwardCache cache;
    cache.layer_caches.resize(static_cast<std::size_t>(net.layer_count()));

    Matrix fused(x_model.rows(), net.config.fused_dim());
    Index offset = 0;
    for (std::size_t i = 0; i < net.fusion.size(); ++i) {
        const Index m = net.config.group_sizes[i];
        fused.middleCols(static_cast<Index>(i) * k, k) =
            dense_forward(net.fusion[i], x_model.middleCols(offset, m), cache.layer_caches[i]);
        offset += m;
    }
    std::size_t at = net.fusion.size();
    Matrix h = dense_forward(net.embedding, fused, cache.layer_caches[at++]);
    for (const DenseLayer& layer : net.hidden) {
        h = dense_forward(layer, h, cache.layer_caches[at++]);
    }
    cache.output = dense_forward(net.output, h, cache.layer_caches[at]);
    return cache;
}

GradList net_backward(const VminNet& net, const ForwardCache& cache, MatrixRef upstream) {
    const std::size_t n_layers = cache.layer_caches.size();
    GradList grads(2 * n_layers);

    auto store = [&](std::size_t layer_idx, const DenseGrads& g) {
        grads[2 * layer_idx] = Eigen::Map<const Vector>(g.weight.data(), g.weight.size());
        grads[2 * layer_idx + 1] = g.bias;
    };

    std::size_t at = n_layers - 1;
    DenseGrads g = dense_backward(net.output, cache.layer_caches[at], upstream);
    store(at, g);
    for (std::size_t i = net.hidden.size(); i-- > 0;) {
        at = net.fusion.size() + 1 + i;
        g = dense_backward(net.hidden[i], cache.layer_caches[at], g.input);
        store(at, g);
    }
    at = net.fusion.size();
    g = dense_backward(net.embedding, cache.layer_caches[at], g.input);
    store(at, g);

    // The embedding input gradient splits into per-group slices.
    const Index k = net.config.fused_per_group;
    for (std::size_t i = 0; i < net.fusion.size(); ++i) {
        DenseGrads fg = dense_backward(net.fusion[i], cache.layer_caches[i],
                                       g.input.middleCols(static_cast<Index>(i) * k, k));
        store(i, fg);
    }
    return grads;
}

std::map<Block, std::vector<ParamView>> partition_params(VminNet& net) {
    std::map<Block, std::vector<ParamView>> parts;
    for (ParamView& v : net.param_views()) parts[v.block].push_back(v);
    return parts;
}

}  // namespace vmin
