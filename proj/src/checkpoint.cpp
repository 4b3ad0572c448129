#include "vmin/checkpoint.hpp"

#include <fstream>
#include <vector>

#include <json.hpp>

#include "vmin/errors.hpp"

namespace vmin {

using nlohmann::json;

namespace {

json dump_layer(const DenseLayer& layer) {
    std::vector<double> weights;
    weights.reserve(static_cast<std::size_t>(layer.weight.size()));
    for (Index i = 0; i < layer.weight.rows(); ++i) {
        for (Index j = 0; j < layer.weight.cols(); ++j) weights.push_back(layer.weight(i, j));
    }
    std::vector<double> bias(layer.bias.data(), layer.bias.data() + layer.bias.size());
    return json{{"rows", layer.weight.rows()},
                {"cols", layer.weight.cols()},
                {"weights", weights},
                {"bias", bias}};
}

void load_layer(const json& j, const std::string& name, Index expect_out, Index expect_in,
                DenseLayer& layer) {
    const auto rows = j.at("rows").get<Index>();
    const auto cols = j.at("cols").get<Index>();
    if (rows != expect_out || cols != expect_in) {
        throw IntegrityError("block '" + name + "' has shape " + std::to_string(rows) + "x" +
                             std::to_string(cols) + ", config requires " +
                             std::to_string(expect_out) + "x" + std::to_string(expect_in));
    }
    const auto weights = j.at("weights").get<std::vector<double>>();
    const auto bias = j.at("bias").get<std::vector<double>>();
    if (static_cast<Index>(weights.size()) != rows * cols ||
        static_cast<Index>(bias.size()) != rows) {
        throw IntegrityError("block '" + name + "' value arrays do not match its shape");
    }
    layer.weight.resize(rows, cols);
    std::size_t at = 0;
    for (Index i = 0; i < rows; ++i) {
        for (Index j2 = 0; j2 < cols; ++j2) layer.weight(i, j2) = weights[at++];
    }
    layer.bias = Eigen::Map<const Vector>(bias.data(), rows);
}

json dump_config(const ModelConfig& c) {
    return json{{"group_sizes", c.group_sizes},
                {"fused_per_group", c.fused_per_group},
                {"embedding_dim", c.embedding_dim},
                {"hidden_dims", c.hidden_dims},
                {"output_dim", c.output_dim},
                {"leaky_slope", c.leaky_slope}};
}

ModelConfig parse_config(const json& j) {
    ModelConfig c;
    c.group_sizes = j.at("group_sizes").get<std::vector<Index>>();
    c.fused_per_group = j.at("fused_per_group").get<Index>();
    c.embedding_dim = j.at("embedding_dim").get<Index>();
    c.hidden_dims = j.at("hidden_dims").get<std::vector<Index>>();
    c.output_dim = j.at("output_dim").get<Index>();
    c.leaky_slope = j.at("leaky_slope").get<double>();
    c.validate();
    return c;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, std::ostream& sink) {
    json blocks;
    auto layers = ckpt.net.layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        blocks[ckpt.net.layer_name(i)] = dump_layer(*layers[i]);
    }

    json groups = json::array();
    for (const FeatureGroup& g : ckpt.groups.groups) {
        groups.push_back(
            {{"name", g.name}, {"kind", group_kind_name(g.kind)}, {"columns", g.columns}});
    }

    std::vector<double> nmin(ckpt.norm.col_min.data(),
                             ckpt.norm.col_min.data() + ckpt.norm.col_min.size());
    std::vector<double> nmax(ckpt.norm.col_max.data(),
                             ckpt.norm.col_max.data() + ckpt.norm.col_max.size());

    json j{{"format_version", ckpt.format_version},
           {"model_config", dump_config(ckpt.net.config)},
           {"blocks", blocks},
           {"norm_stats",
            {{"columns", ckpt.norm.column_names}, {"min", nmin}, {"max", nmax}}},
           {"group_spec", {{"groups", groups}}},
           {"training",
            {{"seed", ckpt.meta.seed},
             {"epochs", ckpt.meta.epochs},
             {"final_loss", ckpt.meta.final_loss},
             {"target_mode", ckpt.meta.target_mode}}}};
    sink << j.dump(1) << '\n';
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
    save_checkpoint(ckpt, out);
    if (!out) throw IoError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(std::istream& source) {
    json j;
    try {
        source >> j;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed checkpoint: ") + e.what());
    }

    Checkpoint ckpt;
    try {
        ckpt.format_version = j.at("format_version").get<int>();
        if (ckpt.format_version != kCheckpointFormatVersion) {
            throw VersionError("unsupported checkpoint format_version " +
                               std::to_string(ckpt.format_version) + ", expected " +
                               std::to_string(kCheckpointFormatVersion));
        }

        const ModelConfig config = parse_config(j.at("model_config"));
        ckpt.net.config = config;

        const json& blocks = j.at("blocks");
        auto expect = [&](const std::string& name) -> const json& {
            if (!blocks.contains(name)) throw IntegrityError("missing parameter block: " + name);
            return blocks.at(name);
        };

        ckpt.net.fusion.resize(config.group_sizes.size());
        for (std::size_t i = 0; i < config.group_sizes.size(); ++i) {
            const std::string name = "fusion_" + std::to_string(i);
            load_layer(expect(name), name, config.fused_per_group, config.group_sizes[i],
                       ckpt.net.fusion[i]);
            ckpt.net.fusion[i].activation = Activation::Identity;
            ckpt.net.fusion[i].leaky_slope = config.leaky_slope;
        }
        load_layer(expect("embedding"), "embedding", config.embedding_dim, config.fused_dim(),
                   ckpt.net.embedding);
        ckpt.net.embedding.activation = Activation::LeakyRelu;
        ckpt.net.embedding.leaky_slope = config.leaky_slope;

        ckpt.net.hidden.resize(config.hidden_dims.size());
        Index in = config.embedding_dim;
        for (std::size_t i = 0; i < config.hidden_dims.size(); ++i) {
            const std::string name = "hidden_" + std::to_string(i);
            load_layer(expect(name), name, config.hidden_dims[i], in, ckpt.net.hidden[i]);
            ckpt.net.hidden[i].activation = Activation::LeakyRelu;
            ckpt.net.hidden[i].leaky_slope = config.leaky_slope;
            in = config.hidden_dims[i];
        }
        load_layer(expect("output"), "output", config.output_dim, in, ckpt.net.output);
        ckpt.net.output.activation = Activation::Identity;
        ckpt.net.output.leaky_slope = config.leaky_slope;

        const json& ns = j.at("norm_stats");
        ckpt.norm.column_names = ns.at("columns").get<std::vector<std::string>>();
        const auto nmin = ns.at("min").get<std::vector<double>>();
        const auto nmax = ns.at("max").get<std::vector<double>>();
        if (nmin.size() != nmax.size() || nmin.size() != ckpt.norm.column_names.size()) {
            throw IntegrityError("norm_stats arrays have inconsistent lengths");
        }
        ckpt.norm.col_min = Eigen::Map<const Vector>(nmin.data(), static_cast<Index>(nmin.size()));
        ckpt.norm.col_max = Eigen::Map<const Vector>(nmax.data(), static_cast<Index>(nmax.size()));
        ckpt.norm.degenerate.resize(nmin.size());
        for (std::size_t i = 0; i < nmin.size(); ++i) {
            ckpt.norm.degenerate[i] = nmin[i] == nmax[i];
        }

        for (const json& jg : j.at("group_spec").at("groups")) {
            FeatureGroup g;
            g.name = jg.at("name").get<std::string>();
            g.kind = parse_group_kind(jg.at("kind").get<std::string>());
            g.columns = jg.at("columns").get<std::vector<std::string>>();
            ckpt.groups.groups.push_back(std::move(g));
        }

        const json& tr = j.at("training");
        ckpt.meta.seed = tr.at("seed").get<std::uint64_t>();
        ckpt.meta.epochs = tr.at("epochs").get<std::int64_t>();
        ckpt.meta.final_loss = tr.at("final_loss").get<double>();
        ckpt.meta.target_mode = tr.at("target_mode").get<std::string>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed checkpoint: ") + e.what());
    }

    if (ckpt.net.config.group_sizes != ckpt.groups.model_group_sizes()) {
        throw IntegrityError("checkpoint group spec does not match model_config group sizes");
    }
    return ckpt;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path.string());
    return load_checkpoint(in);
}

}  // namespace vmin
