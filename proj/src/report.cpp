#include "vmin/report.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "vmin/errors.hpp"

namespace vmin {

using nlohmann::json;

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open report for writing: " + path.string());
    out << text;
    if (!out) throw IoError("failed writing report: " + path.string());
}

json frozen_to_json(const std::set<Block>& frozen) {
    json out = json::array();
    for (Block b : frozen) out.push_back(block_name(b));
    return out;
}

json result_to_json(const ExperimentResult& r) {
    return json{{"arm", r.arm},
                {"model_kind", r.model_kind},
                {"feature_set", r.feature_set},
                {"train_fraction", r.train_fraction},
                {"seed", r.seed},
                {"rmse_mv", r.rmse_mv},
                {"per_pattern_rmse_mv", r.per_pattern_rmse_mv},
                {"pattern_names", r.pattern_names},
                {"runtime_seconds", r.runtime_seconds}};
}

}  // namespace

std::string train_report_json(const TrainReport& report) {
    json epochs = json::array();
    for (std::size_t i = 0; i < report.epoch_losses.size(); ++i) {
        epochs.push_back(json{{"epoch", i}, {"train_loss", report.epoch_losses[i]}});
    }
    json config{{"seed", report.seed},
                {"lr", report.lr},
                {"batch_size", report.batch_size},
                {"epochs", report.epoch_budget},
                {"lambda", report.lambda},
                {"frozen_blocks", frozen_to_json(report.frozen_blocks)}};
    if (report.early_stop_patience) config["early_stop_patience"] = *report.early_stop_patience;
    json j{{"config", config},
           {"epochs", epochs},
           {"summary",
            {{"executed_epochs", report.executed_epochs},
             {"final_train_loss", report.final_train_loss},
             {"aggregate_rmse_mv", report.aggregate_rmse_mv},
             {"per_pattern_rmse_mv", report.per_pattern_rmse_mv},
             {"pattern_names", report.pattern_names},
             {"wall_seconds", report.wall_seconds}}}};
    return j.dump(1) + "\n";
}

void write_train_report(const std::filesystem::path& path, const TrainReport& report) {
    write_text(path, train_report_json(report));
}

std::string experiment_result_json(const ExperimentResult& result) {
    return result_to_json(result).dump(1) + "\n";
}

void write_experiment_result(const std::filesystem::path& path, const ExperimentResult& result) {
    write_text(path, experiment_result_json(result));
}

std::string ablation_report_json(const AblationReport& report) {
    json runs = json::array();
    for (const ExperimentResult& r : report.runs) runs.push_back(result_to_json(r));
    json summary = json::array();
    for (const ArmSummary& s : report.summary) {
        summary.push_back(json{{"arm", s.arm},
                               {"mean_rmse_mv", s.mean_rmse_mv},
                               {"stddev_rmse_mv", s.stddev_rmse_mv},
                               {"n_runs", s.n_runs}});
    }
    return json{{"runs", runs}, {"summary", summary}}.dump(1) + "\n";
}

void write_ablation_report(const std::filesystem::path& path, const AblationReport& report) {
    write_text(path, ablation_report_json(report));
}

std::string format_result_table(const std::vector<ExperimentResult>& results) {
    std::ostringstream out;
    out << std::left << std::setw(28) << "arm" << std::setw(8) << "seed" << std::setw(12)
        << "frac" << std::right << std::setw(14) << "RMSE (mV)" << "\n";
    for (const ExperimentResult& r : results) {
        out << std::left << std::setw(28) << r.arm << std::setw(8) << r.seed << std::setw(12)
            << r.train_fraction << std::right << std::setw(14) << std::fixed
            << std::setprecision(3) << r.rmse_mv << "\n";
        out.unsetf(std::ios::fixed);
        out << std::setprecision(6);
    }
    return out.str();
}

std::string format_summary_table(const std::vector<ArmSummary>& summary) {
    std::ostringstream out;
    out << std::left << std::setw(28) << "arm" << std::right << std::setw(16)
        << "mean RMSE (mV)" << std::setw(14) << "stddev" << std::setw(8) << "runs" << "\n";
    for (const ArmSummary& s : summary) {
        out << std::left << std::setw(28) << s.arm << std::right << std::setw(16) << std::fixed
            << std::setprecision(3) << s.mean_rmse_mv << std::setw(14) << s.stddev_rmse_mv
            << std::setw(8) << s.n_runs << "\n";
        out.unsetf(std::ios::fixed);
        out << std::setprecision(6);
    }
    return out.str();
}

}  // namespace vmin
