#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vmin/types.hpp"

namespace vmin {

struct FeatureMatrix {
    Matrix values;  // dies x features
    std::vector<std::string> column_names;
    std::vector<std::string> row_ids;

    Index column_index(const std::string& name) const;  // SchemaError if absent
};

struct TargetMatrix {
    Matrix values;  // dies x patterns, millivolts
    std::vector<std::string> pattern_names;
    std::vector<std::string> row_ids;
};

enum class GroupKind { Common, Legacy, Odometer };

GroupKind parse_group_kind(const std::string& text);
std::string group_kind_name(GroupKind kind);

struct FeatureGroup {
    std::string name;
    GroupKind kind = GroupKind::Common;
    std::vector<std::string> columns;
};

/// Ordered functional feature groups. Legacy groups are carried through
/// ingestion but excluded from model input.
struct GroupSpec {
    std::vector<FeatureGroup> groups;

    /// Groups that feed the model (legacy excluded), in file order.
    std::vector<FeatureGroup> model_groups() const;
    /// Member columns of model groups, concatenated in group order.
    std::vector<std::string> model_columns() const;
    std::vector<Index> model_group_sizes() const;

    /// Copy without the odometer group(s); used for the feature ablation.
    GroupSpec without_odometers() const;

    bool operator==(const GroupSpec&) const = default;
};

bool operator==(const FeatureGroup& a, const FeatureGroup& b);

enum class NodeLabel { Base, Target };

NodeLabel parse_node_label(const std::string& text);
std::string node_label_name(NodeLabel label);

struct DatasetManifest {
    std::filesystem::path features_path;
    std::filesystem::path targets_path;
    std::filesystem::path groupspec_path;
    NodeLabel node_label = NodeLabel::Base;
    std::vector<int> temperatures_c;
};

struct Dataset {
    FeatureMatrix features;
    TargetMatrix targets;
    GroupSpec groups;
    std::size_t rows_rejected = 0;
};

/// Reads a manifest JSON file; relative data paths resolve against the
/// manifest's own directory.
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

GroupSpec load_groupspec(const std::filesystem::path& path);
void save_groupspec(const std::filesystem::path& path, const GroupSpec& spec);

/// Loads features and targets, aligns rows by die id, drops dies with
/// rejected rows on either side, and validates the group spec against the
/// feature columns.
Dataset load_dataset(const DatasetManifest& manifest);

/// Per-row mean over all pattern columns; the paper-style scalar target.
TargetMatrix make_average_target(const TargetMatrix& targets);

}  // namespace vmin
