#pragma once

#include <filesystem>
#include <string>

#include "vmin/pipeline.hpp"
#include "vmin/transfer/train.hpp"

namespace vmin {

/// Structured training report: config echo, one record per epoch, summary.
std::string train_report_json(const TrainReport& report);
void write_train_report(const std::filesystem::path& path, const TrainReport& report);

std::string experiment_result_json(const ExperimentResult& result);
void write_experiment_result(const std::filesystem::path& path, const ExperimentResult& result);

std::string ablation_report_json(const AblationReport& report);
void write_ablation_report(const std::filesystem::path& path, const AblationReport& report);

/// Fixed-width tables for terminal output.
std::string format_result_table(const std::vector<ExperimentResult>& results);
std::string format_summary_table(const std::vector<ArmSummary>& summary);

}  // namespace vmin
