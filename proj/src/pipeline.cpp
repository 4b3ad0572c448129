#include "vmin/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "vmin/errors.hpp"

namespace vmin {

std::string feature_set_name(FeatureSet fs) {
    return fs == FeatureSet::PostOnly ? "post" : "post+odo";
}

FeatureSet parse_feature_set(const std::string& text) {
    if (text == "post") return FeatureSet::PostOnly;
    if (text == "post+odo") return FeatureSet::PostPlusOdo;
    throw ArgumentError("features must be 'post' or 'post+odo', got: " + text);
}

std::string target_mode_name(TargetMode tm) {
    return tm == TargetMode::Multi ? "multi" : "average";
}

TargetMode parse_target_mode(const std::string& text) {
    if (text == "multi") return TargetMode::Multi;
    if (text == "average") return TargetMode::Average;
    throw ArgumentError("target-mode must be 'multi' or 'average', got: " + text);
}

std::string norm_scope_name(NormScope ns) {
    return ns == NormScope::Train ? "train" : "all";
}

NormScope parse_norm_scope(const std::string& text) {
    if (text == "train") return NormScope::Train;
    if (text == "all") return NormScope::All;
    throw ArgumentError("norm-scope must be 'train' or 'all', got: " + text);
}

namespace {

Matrix gather_rows(MatrixRef source, const std::vector<Index>& rows) {
    Matrix out(static_cast<Index>(rows.size()), source.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Index>(i)) = source.row(rows[i]);
    }
    return out;
}

}  // namespace

PreparedData prepare_data(const Dataset& ds, const PipelineOptions& opts) {
    PreparedData prep;
    prep.groups = opts.feature_set == FeatureSet::PostOnly ? ds.groups.without_odometers()
                                                           : ds.groups;
    prep.split = split_rows(ds.features.values.rows(), opts.train_fraction, opts.split_seed);
    prep.norm = opts.norm_scope == NormScope::Train ? fit_minmax(ds.features, prep.split.train)
                                                    : fit_minmax(ds.features);

    const FeatureMatrix normalized = apply_minmax(ds.features, prep.norm);
    const Matrix x_model = assemble_model_input(normalized, prep.groups);

    const TargetMatrix targets =
        opts.target_mode == TargetMode::Average ? make_average_target(ds.targets) : ds.targets;

    prep.train.x = gather_rows(x_model, prep.split.train);
    prep.train.y = gather_rows(targets.values, prep.split.train);
    prep.train.pattern_names = targets.pattern_names;
    prep.test.x = gather_rows(x_model, prep.split.test);
    prep.test.y = gather_rows(targets.values, prep.split.test);
    prep.test.pattern_names = targets.pattern_names;

    prep.model_config = default_model_config(prep.groups, targets.values.cols());
    return prep;
}

ExperimentResult evaluate_checkpoint(const Checkpoint& ckpt, const Dataset& ds,
                                     double train_fraction, std::uint64_t split_seed,
                                     TargetMode target_mode) {
    if (ckpt.norm.column_names != ds.features.column_names) {
        throw SchemaError(
            "checkpoint normalization stats do not match the dataset's feature columns");
    }
    const auto t0 = std::chrono::steady_clock::now();
    const SplitIndices split =
        split_rows(ds.features.values.rows(), train_fraction, split_seed);
    const FeatureMatrix normalized = apply_minmax(ds.features, ckpt.norm);
    const Matrix x_model = assemble_model_input(normalized, ckpt.groups);

    const TargetMatrix targets =
        target_mode == TargetMode::Average ? make_average_target(ds.targets) : ds.targets;
    if (targets.values.cols() != ckpt.net.config.output_dim) {
        throw SchemaError("checkpoint predicts " + std::to_string(ckpt.net.config.output_dim) +
                          " patterns but the dataset provides " +
                          std::to_string(targets.values.cols()));
    }

    const Matrix x_test = gather_rows(x_model, split.test);
    const Matrix y_test = gather_rows(targets.values, split.test);
    const Matrix pred = net_forward(ckpt.net, x_test);

    bool has_odometers = false;
    for (const FeatureGroup& g : ckpt.groups.groups) {
        if (g.kind == GroupKind::Odometer) has_odometers = true;
    }

    ExperimentResult result;
    result.model_kind = "nn";
    result.feature_set =
        feature_set_name(has_odometers ? FeatureSet::PostPlusOdo : FeatureSet::PostOnly);
    result.train_fraction = train_fraction;
    result.seed = split_seed;
    result.rmse_mv = pooled_rmse(pred, y_test);
    result.per_pattern_rmse_mv = per_pattern_rmse(pred, y_test);
    result.pattern_names = targets.pattern_names;
    result.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

namespace {

ExperimentResult result_from_run(const std::string& kind, const PipelineOptions& opts,
                                 const TrainReport& report, double runtime_seconds) {
    ExperimentResult result;
    result.model_kind = kind;
    result.feature_set = feature_set_name(opts.feature_set);
    result.arm = kind + "/" + result.feature_set;
    result.train_fraction = opts.train_fraction;
    result.seed = opts.split_seed;
    result.rmse_mv = report.aggregate_rmse_mv;
    result.per_pattern_rmse_mv = report.per_pattern_rmse_mv;
    result.pattern_names = report.pattern_names;
    result.runtime_seconds = runtime_seconds;
    return result;
}

}  // namespace

NnRun run_scratch_nn(const Dataset& ds, const PipelineOptions& opts, const TrainConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    PreparedData prep = prepare_data(ds, opts);

    TrainConfig scratch_cfg = cfg;
    scratch_cfg.freeze_mask.clear();
    scratch_cfg.lambda = 0.0;

    NnRun run;
    run.ckpt = pretrain(prep.train, prep.model_config, scratch_cfg, prep.norm, prep.groups,
                        run.report, &prep.test);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run.result = result_from_run("scratch_nn", opts, run.report, secs);
    return run;
}

NnRun run_transferred_nn(const Dataset& ds, const Checkpoint& base_ckpt,
                         const PipelineOptions& opts, const TrainConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    PreparedData prep = prepare_data(ds, opts);

    VminNet net = transplant(base_ckpt, prep.model_config, cfg.seed);
    if (!cfg.freeze_mask.count(Block::Output)) {
        warm_start_output_bias(net, prep.train.y);
    }
    NnRun run;
    run.ckpt = finetune(net, prep.train, cfg, prep.norm, prep.groups, run.report, &prep.test,
                        &base_ckpt);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run.result = result_from_run("transferred_nn", opts, run.report, secs);
    return run;
}

ExperimentResult run_baseline(const Dataset& ds, const PipelineOptions& opts,
                              const std::string& kind, Index k_features,
                              const GbtParams& gbt_params) {
    if (kind != "linear" && kind != "gbt") {
        throw ArgumentError("baseline kind must be 'linear' or 'gbt', got: " + kind);
    }
    const auto t0 = std::chrono::steady_clock::now();

    const GroupSpec groups = opts.feature_set == FeatureSet::PostOnly
                                 ? ds.groups.without_odometers()
                                 : ds.groups;
    // Baselines see raw feature values; correlation ranking and tree splits
    // are scale invariant and OLS absorbs affine scaling.
    const Matrix x_model = assemble_model_input(ds.features, groups);
    const TargetMatrix targets =
        opts.target_mode == TargetMode::Average ? make_average_target(ds.targets) : ds.targets;

    const SplitIndices split =
        split_rows(ds.features.values.rows(), opts.train_fraction, opts.split_seed);
    const Matrix x_train = gather_rows(x_model, split.train);
    const Matrix x_test = gather_rows(x_model, split.test);
    const Matrix y_train = gather_rows(targets.values, split.train);
    const Matrix y_test = gather_rows(targets.values, split.test);

    const Index k = std::min<Index>(k_features, x_model.cols());
    Matrix pred(x_test.rows(), y_test.cols());
    for (Index r = 0; r < y_train.cols(); ++r) {
        const std::vector<Index> picked = cfs_select(x_train, y_train.col(r), k);
        Matrix sub_train(x_train.rows(), k);
        Matrix sub_test(x_test.rows(), k);
        for (Index j = 0; j < k; ++j) {
            sub_train.col(j) = x_train.col(picked[static_cast<std::size_t>(j)]);
            sub_test.col(j) = x_test.col(picked[static_cast<std::size_t>(j)]);
        }
        if (kind == "linear") {
            const LinearModel model = ols_fit(sub_train, y_train.col(r));
            pred.col(r) = ols_predict(model, sub_test);
        } else {
            const GbtModel model = gbt_fit(sub_train, y_train.col(r), gbt_params);
            pred.col(r) = gbt_predict(model, sub_test);
        }
    }

    ExperimentResult result;
    result.model_kind = kind;
    result.feature_set = feature_set_name(opts.feature_set);
    result.arm = kind + "/" + result.feature_set;
    result.train_fraction = opts.train_fraction;
    result.seed = opts.split_seed;
    result.rmse_mv = pooled_rmse(pred, y_test);
    result.per_pattern_rmse_mv = per_pattern_rmse(pred, y_test);
    result.pattern_names = targets.pattern_names;
    result.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

AblationReport run_ablation(const Dataset& target_ds, const Checkpoint& base_ckpt,
                            const AblationConfig& cfg) {
    AblationReport report;
    for (std::uint64_t seed : cfg.seeds) {
        PipelineOptions opts;
        opts.train_fraction = cfg.train_fraction;
        opts.split_seed = seed;
        opts.target_mode = cfg.target_mode;
        opts.norm_scope = cfg.norm_scope;

        TrainConfig train_cfg = cfg.train;
        train_cfg.seed = seed;

        for (FeatureSet fs : {FeatureSet::PostOnly, FeatureSet::PostPlusOdo}) {
            opts.feature_set = fs;
            report.runs.push_back(run_baseline(target_ds, opts, "linear", cfg.k_features));

            TrainConfig transfer_cfg = train_cfg;
            transfer_cfg.freeze_mask = {Block::Hidden};
            report.runs.push_back(
                run_transferred_nn(target_ds, base_ckpt, opts, transfer_cfg).result);
        }

        opts.feature_set = FeatureSet::PostPlusOdo;
        report.runs.push_back(run_scratch_nn(target_ds, opts, train_cfg).result);
        report.runs.push_back(
            run_baseline(target_ds, opts, "gbt", cfg.k_features, cfg.gbt));
    }

    // One summary row per arm, in first-seen order.
    std::vector<std::string> arm_order;
    for (const ExperimentResult& r : report.runs) {
        if (std::find(arm_order.begin(), arm_order.end(), r.arm) == arm_order.end()) {
            arm_order.push_back(r.arm);
        }
    }
    for (const std::string& arm : arm_order) {
        report.summary.push_back(summarize_arm(report, arm));
    }
    return report;
}

ArmSummary summarize_arm(const AblationReport& report, const std::string& arm) {
    ArmSummary s;
    s.arm = arm;
    double sum = 0.0;
    for (const ExperimentResult& r : report.runs) {
        if (r.arm != arm) continue;
        sum += r.rmse_mv;
        s.n_runs += 1;
    }
    if (s.n_runs == 0) throw ArgumentError("no runs for arm: " + arm);
    s.mean_rmse_mv = sum / s.n_runs;
    double sq = 0.0;
    for (const ExperimentResult& r : report.runs) {
        if (r.arm != arm) continue;
        sq += (r.rmse_mv - s.mean_rmse_mv) * (r.rmse_mv - s.mean_rmse_mv);
    }
    s.stddev_rmse_mv = s.n_runs > 1 ? std::sqrt(sq / (s.n_runs - 1)) : 0.0;
    return s;
}

}  // namespace vmin
