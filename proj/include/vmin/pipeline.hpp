#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vmin/baselines/baselines.hpp"
#include "vmin/checkpoint.hpp"
#include "vmin/data/dataset.hpp"
#include "vmin/data/normalize.hpp"
#include "vmin/data/split.hpp"
#include "vmin/metrics.hpp"
#include "vmin/transfer/train.hpp"

namespace vmin {

enum class FeatureSet { PostOnly, PostPlusOdo };
enum class TargetMode { Multi, Average };
enum class NormScope { Train, All };

std::string feature_set_name(FeatureSet fs);
FeatureSet parse_feature_set(const std::string& text);
std::string target_mode_name(TargetMode tm);
TargetMode parse_target_mode(const std::string& text);
std::string norm_scope_name(NormScope ns);
NormScope parse_norm_scope(const std::string& text);

struct PipelineOptions {
    double train_fraction = 0.75;
    std::uint64_t split_seed = 1;
    TargetMode target_mode = TargetMode::Multi;
    FeatureSet feature_set = FeatureSet::PostPlusOdo;
    NormScope norm_scope = NormScope::Train;
};

/// Split, normalization and model-input assembly for one dataset.
struct PreparedData {
    GroupSpec groups;  // feature-set filtered
    NormStats norm;
    SplitIndices split;
    TrainSet train;
    TrainSet test;
    ModelConfig model_config;  // default architecture for this data
};

PreparedData prepare_data(const Dataset& ds, const PipelineOptions& opts);

/// One experiment arm's held-out metrics.
struct ExperimentResult {
    std::string arm;         // unique arm label, e.g. "transferred_nn/post+odo"
    std::string model_kind;  // transferred_nn | scratch_nn | linear | gbt
    std::string feature_set;
    double train_fraction = 0.0;
    std::uint64_t seed = 0;
    double rmse_mv = 0.0;
    std::vector<double> per_pattern_rmse_mv;
    std::vector<std::string> pattern_names;
    double runtime_seconds = 0.0;
};

/// Evaluates a checkpoint on the held-out split of a dataset, normalizing
/// with the checkpoint's own stats. SchemaError when the stats or group
/// spec do not match the dataset's columns.
ExperimentResult evaluate_checkpoint(const Checkpoint& ckpt, const Dataset& ds,
                                     double train_fraction, std::uint64_t split_seed,
                                     TargetMode target_mode);

struct NnRun {
    Checkpoint ckpt;
    TrainReport report;
    ExperimentResult result;
};

/// Trains a fresh network on the prepared training split (scratch arm).
NnRun run_scratch_nn(const Dataset& ds, const PipelineOptions& opts, const TrainConfig& cfg);

/// Transplants the base hidden block and fine-tunes with the configured
/// freeze mask (transferred arm).
NnRun run_transferred_nn(const Dataset& ds, const Checkpoint& base_ckpt,
                         const PipelineOptions& opts, const TrainConfig& cfg);

/// Per-pattern CFS + model fit on raw feature values; kind is "linear" or
/// "gbt".
ExperimentResult run_baseline(const Dataset& ds, const PipelineOptions& opts,
                              const std::string& kind, Index k_features,
                              const GbtParams& gbt_params = {});

struct AblationConfig {
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    double train_fraction = 0.25;
    TrainConfig train;
    Index k_features = 3;
    GbtParams gbt;
    TargetMode target_mode = TargetMode::Multi;
    NormScope norm_scope = NormScope::Train;
};

struct ArmSummary {
    std::string arm;
    double mean_rmse_mv = 0.0;
    double stddev_rmse_mv = 0.0;
    int n_runs = 0;
};

struct AblationReport {
    std::vector<ExperimentResult> runs;
    std::vector<ArmSummary> summary;
};

/// Runs the six standard arms ({linear, transferred_nn} x {post, post+odo}
/// plus scratch_nn and gbt on post+odo) for every seed; arms sharing a
/// seed share the same split.
AblationReport run_ablation(const Dataset& target_ds, const Checkpoint& base_ckpt,
                            const AblationConfig& cfg);

ArmSummary summarize_arm(const AblationReport& report, const std::string& arm);

}  // namespace vmin
