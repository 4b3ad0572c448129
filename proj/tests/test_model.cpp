#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "support.hpp"
#include "vmin/checkpoint.hpp"
#include "vmin/errors.hpp"
#include "vmin/model/net.hpp"

using namespace vmin;
using testsupport::random_matrix;

namespace {

ModelConfig target_default_config() {
    ModelConfig c;
    c.group_sizes = {12, 7, 18, 124};
    c.output_dim = 27;
    return c;
}

ModelConfig base_default_config() {
    ModelConfig c;
    c.group_sizes = {5, 19, 21};
    c.output_dim = 63;
    return c;
}

GroupSpec two_group_spec() {
    GroupSpec spec;
    spec.groups = {
        {"g1", GroupKind::Common, {"a", "b"}},
        {"g2", GroupKind::Odometer, {"c", "d", "e"}},
    };
    return spec;
}

FeatureMatrix five_col_features(Rng& rng, Index rows) {
    FeatureMatrix fm;
    fm.column_names = {"a", "b", "c", "d", "e"};
    fm.values = random_matrix(rng, rows, 5);
    for (Index i = 0; i < rows; ++i) fm.row_ids.push_back("d" + std::to_string(i));
    return fm;
}

}  // namespace

TEST_CASE("parameter counts match the closed-form shape sums") {
    // Target-node default: 330 + 288 + 2112 + 1040 + 1088 + 1755 = 6613.
    const ModelConfig target = target_default_config();
    CHECK(target.parameter_count() == 6613);
    VminNet net = build_model(target, 1);
    CHECK(net.parameter_count() == 6613);

    Index fusion_params = 0;
    for (const DenseLayer& l : net.fusion) fusion_params += l.parameter_count();
    CHECK(fusion_params == 330);
    CHECK(net.embedding.parameter_count() == 288);
    CHECK(net.hidden[0].parameter_count() == 2112);
    CHECK(net.hidden[1].parameter_count() == 1040);
    CHECK(net.hidden[2].parameter_count() == 1088);
    CHECK(net.output.parameter_count() == 1755);

    // Base-node default fusion block: (2*5+2)+(2*19+2)+(2*21+2) = 96.
    VminNet base = build_model(base_default_config(), 1);
    Index base_fusion = 0;
    for (const DenseLayer& l : base.fusion) base_fusion += l.parameter_count();
    CHECK(base_fusion == 96);

    // Minimal net: 8 parameters.
    ModelConfig tiny;
    tiny.group_sizes = {1};
    tiny.fused_per_group = 1;
    tiny.embedding_dim = 1;
    tiny.hidden_dims = {1};
    tiny.output_dim = 1;
    CHECK(tiny.parameter_count() == 8);
}

TEST_CASE("partition_params is disjoint, exhaustive and has the expected hidden size") {
    VminNet net = build_model(target_default_config(), 2);
    auto parts = partition_params(net);

    Index hidden_size = 0;
    for (const ParamView& v : parts[Block::Hidden]) hidden_size += v.size;
    CHECK(hidden_size == 4240);  // 2112 + 1040 + 1088

    Index total = 0;
    std::set<const double*> seen;
    for (const auto& [block, views] : parts) {
        for (const ParamView& v : views) {
            total += v.size;
            CHECK(seen.insert(v.data).second);  // no tensor appears twice
        }
    }
    CHECK(total == net.parameter_count());
}

TEST_CASE("partition sizes are stable across checkpoint save/load") {
    VminNet net = build_model(target_default_config(), 3);
    Checkpoint ckpt;
    ckpt.net = net;
    ckpt.norm.column_names = {};
    ckpt.norm.col_min.resize(0);
    ckpt.norm.col_max.resize(0);
    GroupSpec gs;
    for (std::size_t g = 0; g < 4; ++g) {
        FeatureGroup group;
        group.name = "g" + std::to_string(g);
        group.kind = g == 3 ? GroupKind::Odometer : GroupKind::Common;
        for (Index i = 0; i < net.config.group_sizes[g]; ++i) {
            group.columns.push_back(group.name + "_" + std::to_string(i));
        }
        gs.groups.push_back(group);
    }
    ckpt.groups = gs;

    std::stringstream buffer;
    save_checkpoint(ckpt, buffer);
    Checkpoint loaded = load_checkpoint(buffer);

    auto before = partition_params(net);
    auto after = partition_params(loaded.net);
    for (Block b : {Block::Fusion, Block::Embedding, Block::Hidden, Block::Output}) {
        Index sa = 0, sb = 0;
        for (const ParamView& v : before[b]) sa += v.size;
        for (const ParamView& v : after[b]) sb += v.size;
        CHECK(sa == sb);
    }
}

TEST_CASE("forward with zero weights yields the output bias") {
    GroupSpec spec = two_group_spec();
    ModelConfig config = default_model_config(spec, 3);
    config.embedding_dim = 4;
    config.hidden_dims = {4};
    VminNet net = build_model(config, 4);
    for (DenseLayer* l : net.layers()) {
        l->weight.setZero();
        l->bias.setZero();
    }
    net.output.bias << 1.5, -2.0, 0.25;

    Rng rng(5);
    FeatureMatrix fm = five_col_features(rng, 3);
    const Matrix y = forward(net, fm, spec);
    for (Index i = 0; i < 3; ++i) {
        CHECK(y(i, 0) == 1.5);
        CHECK(y(i, 1) == -2.0);
        CHECK(y(i, 2) == 0.25);
    }
}

TEST_CASE("forward is invariant to a consistent column permutation") {
    GroupSpec spec = two_group_spec();
    ModelConfig config = default_model_config(spec, 2);
    VminNet net = build_model(config, 6);

    Rng rng(7);
    FeatureMatrix fm = five_col_features(rng, 4);
    const Matrix y = forward(net, fm, spec);

    // Permute feature columns and the group membership identically.
    FeatureMatrix permuted;
    permuted.row_ids = fm.row_ids;
    permuted.column_names = {"e", "a", "d", "b", "c"};
    permuted.values.resize(4, 5);
    for (std::size_t j = 0; j < permuted.column_names.size(); ++j) {
        permuted.values.col(static_cast<Index>(j)) =
            fm.values.col(fm.column_index(permuted.column_names[j]));
    }
    const Matrix y2 = forward(net, permuted, spec);
    CHECK((y - y2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("forward matches an independent layer-by-layer scalar oracle") {
    GroupSpec spec = two_group_spec();
    ModelConfig config = default_model_config(spec, 3);
    config.embedding_dim = 6;
    config.hidden_dims = {5, 4};
    VminNet net = build_model(config, 8);

    Rng rng(9);
    FeatureMatrix fm = five_col_features(rng, 3);
    const Matrix y = forward(net, fm, spec);

    auto scalar_layer = [](const DenseLayer& layer, const std::vector<double>& in) {
        std::vector<double> out(static_cast<std::size_t>(layer.weight.rows()));
        for (Index o = 0; o < layer.weight.rows(); ++o) {
            double acc = layer.bias[o];
            for (Index i = 0; i < layer.weight.cols(); ++i) {
                acc += layer.weight(o, i) * in[static_cast<std::size_t>(i)];
            }
            if (layer.activation == Activation::LeakyRelu && acc < 0.0) {
                acc *= layer.leaky_slope;
            }
            out[static_cast<std::size_t>(o)] = acc;
        }
        return out;
    };

    for (Index row = 0; row < 3; ++row) {
        // Group slices in spec order: {a,b} then {c,d,e}.
        std::vector<double> g1{fm.values(row, 0), fm.values(row, 1)};
        std::vector<double> g2{fm.values(row, 2), fm.values(row, 3), fm.values(row, 4)};
        std::vector<double> fused = scalar_layer(net.fusion[0], g1);
        std::vector<double> f2 = scalar_layer(net.fusion[1], g2);
        fused.insert(fused.end(), f2.begin(), f2.end());
        std::vector<double> h = scalar_layer(net.embedding, fused);
        for (const DenseLayer& layer : net.hidden) h = scalar_layer(layer, h);
        std::vector<double> out = scalar_layer(net.output, h);
        for (Index j = 0; j < 3; ++j) {
            CHECK(std::abs(y(row, j) - out[static_cast<std::size_t>(j)]) < 1e-12);
        }
    }
}

TEST_CASE("forward raises schema error when a group column is missing") {
    GroupSpec spec = two_group_spec();
    spec.groups[1].columns.push_back("ghost");
    ModelConfig config;
    config.group_sizes = {2, 4};
    config.output_dim = 1;
    VminNet net = build_model(config, 10);
    Rng rng(11);
    FeatureMatrix fm = five_col_features(rng, 2);
    CHECK_THROWS_WITH_AS(forward(net, fm, spec), doctest::Contains("ghost"), SchemaError);
}

TEST_CASE("output shape is batch x output_dim") {
    Rng rng(12);
    for (Index batch : {1, 3, 17}) {
        GroupSpec spec = two_group_spec();
        ModelConfig config = default_model_config(spec, 4);
        VminNet net = build_model(config, 13);
        FeatureMatrix fm = five_col_features(rng, batch);
        const Matrix y = forward(net, fm, spec);
        CHECK(y.rows() == batch);
        CHECK(y.cols() == 4);
    }
}

TEST_CASE("build_model is bit-reproducible for identical seed and config") {
    const ModelConfig config = target_default_config();
    VminNet a = build_model(config, 99);
    VminNet b = build_model(config, 99);
    auto la = a.layers();
    auto lb = b.layers();
    for (std::size_t i = 0; i < la.size(); ++i) {
        CHECK(la[i]->weight == lb[i]->weight);
        CHECK(la[i]->bias == lb[i]->bias);
    }
    VminNet c = build_model(config, 100);
    bool any_diff = false;
    auto lc = c.layers();
    for (std::size_t i = 0; i < la.size(); ++i) {
        if (la[i]->weight != lc[i]->weight) any_diff = true;
    }
    CHECK(any_diff);
}

TEST_CASE("zeroing one group's fusion weights makes the output ignore that group") {
    GroupSpec spec = two_group_spec();
    ModelConfig config = default_model_config(spec, 2);
    VminNet net = build_model(config, 14);
    net.fusion[1].weight.setZero();  // group g2 = columns c, d, e

    Rng rng(15);
    FeatureMatrix fm = five_col_features(rng, 5);
    const Matrix y = forward(net, fm, spec);

    FeatureMatrix altered = fm;
    altered.values.col(2).array() += 10.0;
    altered.values.col(3).array() -= 3.0;
    altered.values.col(4).array() *= -2.0;
    const Matrix y2 = forward(net, altered, spec);
    CHECK((y - y2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("invalid configs are rejected") {
    ModelConfig c;
    c.group_sizes = {};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.group_sizes = {3};
    c.fused_per_group = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.fused_per_group = 1;
    c.output_dim = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.output_dim = 1;
    c.leaky_slope = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}
