#include "vmin/data/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "vmin/data/csv.hpp"
#include "vmin/errors.hpp"

namespace vmin {

using nlohmann::json;

Index FeatureMatrix::column_index(const std::string& name) const {
    auto it = std::find(column_names.begin(), column_names.end(), name);
    if (it == column_names.end()) {
        throw SchemaError("feature column not found: " + name);
    }
    return static_cast<Index>(it - column_names.begin());
}

GroupKind parse_group_kind(const std::string& text) {
    if (text == "common") return GroupKind::Common;
    if (text == "legacy") return GroupKind::Legacy;
    if (text == "odometer") return GroupKind::Odometer;
    throw SchemaError("unknown group kind: " + text);
}

std::string group_kind_name(GroupKind kind) {
    switch (kind) {
        case GroupKind::Common: return "common";
        case GroupKind::Legacy: return "legacy";
        case GroupKind::Odometer: return "odometer";
    }
    return "?";
}

bool operator==(const FeatureGroup& a, const FeatureGroup& b) {
    return a.name == b.name && a.kind == b.kind && a.columns == b.columns;
}

std::vector<FeatureGroup> GroupSpec::model_groups() const {
    std::vector<FeatureGroup> out;
    for (const FeatureGroup& g : groups) {
        if (g.kind != GroupKind::Legacy) out.push_back(g);
    }
    return out;
}

std::vector<std::string> GroupSpec::model_columns() const {
    std::vector<std::string> out;
    for (const FeatureGroup& g : model_groups()) {
        out.insert(out.end(), g.columns.begin(), g.columns.end());
    }
    return out;
}

std::vector<Index> GroupSpec::model_group_sizes() const {
    std::vector<Index> out;
    for (const FeatureGroup& g : model_groups()) {
        out.push_back(static_cast<Index>(g.columns.size()));
    }
    return out;
}

GroupSpec GroupSpec::without_odometers() const {
    GroupSpec out;
    for (const FeatureGroup& g : groups) {
        if (g.kind != GroupKind::Odometer) out.groups.push_back(g);
    }
    return out;
}

NodeLabel parse_node_label(const std::string& text) {
    if (text == "base") return NodeLabel::Base;
    if (text == "target") return NodeLabel::Target;
    throw SchemaError("node_label must be 'base' or 'target', got: " + text);
}

std::string node_label_name(NodeLabel label) {
    return label == NodeLabel::Base ? "base" : "target";
}

namespace {

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return j;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing file: " + path.string());
}

}  // namespace

DatasetManifest load_manifest(const std::filesystem::path& path) {
    json j = read_json_file(path);
    DatasetManifest m;
    try {
        const auto dir = path.parent_path();
        m.features_path = dir / j.at("features").get<std::string>();
        m.targets_path = dir / j.at("targets").get<std::string>();
        m.groupspec_path = dir / j.at("groupspec").get<std::string>();
        m.node_label = parse_node_label(j.at("node_label").get<std::string>());
        m.temperatures_c = j.at("temperatures_c").get<std::vector<int>>();
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
    for (const auto& p : {m.features_path, m.targets_path, m.groupspec_path}) {
        if (!std::filesystem::exists(p)) {
            throw IoError("manifest references missing file: " + p.string());
        }
    }
    return m;
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
    // Stored paths are relative to the manifest location when possible.
    auto rel = [&](const std::filesystem::path& p) {
        auto r = p.lexically_relative(path.parent_path());
        return r.empty() ? p.string() : r.string();
    };
    json j{{"features", rel(manifest.features_path)},
           {"targets", rel(manifest.targets_path)},
           {"groupspec", rel(manifest.groupspec_path)},
           {"node_label", node_label_name(manifest.node_label)},
           {"temperatures_c", manifest.temperatures_c}};
    write_json_file(path, j);
}

GroupSpec load_groupspec(const std::filesystem::path& path) {
    json j = read_json_file(path);
    GroupSpec spec;
    try {
        for (const json& jg : j.at("groups")) {
            FeatureGroup g;
            g.name = jg.at("name").get<std::string>();
            g.kind = parse_group_kind(jg.at("kind").get<std::string>());
            g.columns = jg.at("columns").get<std::vector<std::string>>();
            spec.groups.push_back(std::move(g));
        }
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
    return spec;
}

void save_groupspec(const std::filesystem::path& path, const GroupSpec& spec) {
    json groups = json::array();
    for (const FeatureGroup& g : spec.groups) {
        groups.push_back(
            {{"name", g.name}, {"kind", group_kind_name(g.kind)}, {"columns", g.columns}});
    }
    write_json_file(path, json{{"groups", groups}});
}

namespace {

void validate_groupspec(const GroupSpec& spec, const FeatureMatrix& features) {
    std::unordered_set<std::string> available(features.column_names.begin(),
                                              features.column_names.end());
    std::unordered_set<std::string> claimed;
    for (const FeatureGroup& g : spec.groups) {
        for (const std::string& c : g.columns) {
            if (!available.count(c)) {
                throw SchemaError("group '" + g.name + "' references missing column: " + c);
            }
            if (!claimed.insert(c).second) {
                throw SchemaError("column assigned to more than one group: " + c);
            }
        }
    }
}

}  // namespace

Dataset load_dataset(const DatasetManifest& manifest) {
    CsvTable ft = read_csv(manifest.features_path);
    CsvTable tt = read_csv(manifest.targets_path);

    // Dies rejected on either side are dropped from both.
    std::unordered_set<std::string> bad(ft.rejected_ids.begin(), ft.rejected_ids.end());
    bad.insert(tt.rejected_ids.begin(), tt.rejected_ids.end());

    auto keep_rows = [&](const CsvTable& t) {
        std::vector<Index> keep;
        for (Index i = 0; i < t.values.rows(); ++i) {
            if (!bad.count(t.row_ids[static_cast<std::size_t>(i)])) keep.push_back(i);
        }
        return keep;
    };
    const std::vector<Index> fkeep = keep_rows(ft);
    const std::vector<Index> tkeep = keep_rows(tt);

    if (fkeep.size() != tkeep.size()) {
        throw SchemaError("row-count mismatch after ingestion: features have " +
                          std::to_string(fkeep.size()) + " dies, targets have " +
                          std::to_string(tkeep.size()));
    }
    for (std::size_t i = 0; i < fkeep.size(); ++i) {
        const std::string& fid = ft.row_ids[static_cast<std::size_t>(fkeep[i])];
        const std::string& tid = tt.row_ids[static_cast<std::size_t>(tkeep[i])];
        if (fid != tid) {
            throw SchemaError("die id mismatch at row " + std::to_string(i) + ": '" + fid +
                              "' vs '" + tid + "'");
        }
    }

    Dataset ds;
    ds.rows_rejected = bad.size();
    ds.features.column_names = ft.columns;
    ds.targets.pattern_names = tt.columns;
    const Index n = static_cast<Index>(fkeep.size());
    ds.features.values.resize(n, ft.values.cols());
    ds.targets.values.resize(n, tt.values.cols());
    for (Index i = 0; i < n; ++i) {
        ds.features.values.row(i) = ft.values.row(fkeep[static_cast<std::size_t>(i)]);
        ds.targets.values.row(i) = tt.values.row(tkeep[static_cast<std::size_t>(i)]);
        ds.features.row_ids.push_back(ft.row_ids[static_cast<std::size_t>(fkeep[static_cast<std::size_t>(i)])]);
    }
    ds.targets.row_ids = ds.features.row_ids;

    ds.groups = load_groupspec(manifest.groupspec_path);
    validate_groupspec(ds.groups, ds.features);
    return ds;
}

TargetMatrix make_average_target(const TargetMatrix& targets) {
    if (targets.values.cols() < 1) {
        throw DimensionError("make_average_target requires at least one pattern column");
    }
    TargetMatrix out;
    out.values = targets.values.rowwise().mean();
    out.pattern_names = {"pattern_average"};
    out.row_ids = targets.row_ids;
    return out;
}

}  // namespace vmin
