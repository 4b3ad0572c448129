#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vmin/checkpoint.hpp"
#include "vmin/model/net.hpp"
#include "vmin/types.hpp"

namespace vmin {

struct TrainConfig {
    double lr = 1e-3;
    Index batch_size = 32;
    std::int64_t epochs = 2000;
    std::uint64_t seed = 1;
    double lambda = 0.0;  // weight of the L2-to-base penalty; 0 disables
    std::set<Block> freeze_mask;
    std::optional<std::int64_t> early_stop_patience;

    void validate() const;
};

struct TrainReport {
    std::vector<double> epoch_losses;  // one record per executed epoch
    double final_train_loss = 0.0;
    std::vector<double> per_pattern_rmse_mv;  // empty when no eval set given
    double aggregate_rmse_mv = 0.0;
    std::vector<std::string> pattern_names;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
    std::int64_t executed_epochs = 0;
    std::int64_t epoch_budget = 0;
    std::set<Block> frozen_blocks;
    double lambda = 0.0;
    double lr = 0.0;
    Index batch_size = 0;
    std::optional<std::int64_t> early_stop_patience;
};

/// Normalized model input (columns in group order) plus targets in mV.
struct TrainSet {
    Matrix x;
    Matrix y;
    std::vector<std::string> pattern_names;
};

/// L2 distance penalty pulling parameters toward a base snapshot:
/// penalty = lambda * sum((theta - theta_base)^2), gradient
/// 2 * lambda * (theta - theta_base), per aligned tensor.
struct L2Penalty {
    double penalty = 0.0;
    GradList grads;
};
L2Penalty l2_to_base(const std::vector<ParamView>& params, const GradList& base_params,
                     double lambda);

/// Mini-batch Adam training of `net` in place. The L2-to-base penalty is
/// taken against `base_hidden` (aligned with the hidden-block views) when
/// cfg.lambda > 0. Frozen blocks receive no updates. Throws TrainingError
/// on a non-finite loss, reporting the epoch and learning rate.
TrainReport train(VminNet& net, const TrainSet& train_set, const TrainConfig& cfg,
                  const TrainSet* eval_set = nullptr, const GradList* base_hidden = nullptr);

/// Pre-training warm start: points the output bias at the per-pattern
/// training means. Adam moves parameters by about lr per step, so starting
/// hundreds of millivolts below the target level would eat the whole
/// desk-scale epoch budget on the offset alone.
void warm_start_output_bias(VminNet& net, MatrixRef train_targets);

/// Base-node pretraining: builds the model from cfg.seed and minimizes the
/// multi-output MSE. freeze_mask must be empty. Returns a checkpoint
/// carrying the parameters plus the normalization stats and group spec the
/// data was prepared with.
Checkpoint pretrain(const TrainSet& train_set, const ModelConfig& config, const TrainConfig& cfg,
                    const NormStats& norm, const GroupSpec& groups, TrainReport& report,
                    const TrainSet* eval_set = nullptr);

/// Copies the hidden block of a base checkpoint into a freshly initialized
/// target network. Fusion, embedding and output layers are new; the hidden
/// chain is copied bit-exactly. Throws TransplantError when the hidden
/// architecture (or the embedding width feeding it) does not line up.
VminNet transplant(const Checkpoint& base_ckpt, const ModelConfig& target_config,
                   std::uint64_t seed);

/// Fine-tunes `net` (default freeze_mask {hidden}) and wraps the result in
/// a checkpoint with the target node's stats.
Checkpoint finetune(VminNet& net, const TrainSet& train_set, const TrainConfig& cfg,
                    const NormStats& norm, const GroupSpec& groups, TrainReport& report,
                    const TrainSet* eval_set = nullptr, const Checkpoint* base_ckpt = nullptr);

}  // namespace vmin
