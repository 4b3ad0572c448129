#include "vmin/transfer/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "vmin/errors.hpp"
#include "vmin/metrics.hpp"
#include "vmin/nn/adam.hpp"
#include "vmin/nn/loss.hpp"
#include "vmin/rng.hpp"

namespace vmin {

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw ConfigError("learning rate must be > 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
    if (early_stop_patience && *early_stop_patience < 1) {
        throw ConfigError("early_stop_patience must be >= 1");
    }
}

L2Penalty l2_to_base(const std::vector<ParamView>& params, const GradList& base_params,
                     double lambda) {
    if (params.size() != base_params.size()) {
        throw DimensionError("l2_to_base: parameter lists must align");
    }
    L2Penalty out;
    out.grads.reserve(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i].vec();
        if (p.size() != base_params[i].size()) {
            throw DimensionError("l2_to_base: size mismatch for " + params[i].name);
        }
        Vector diff = p - base_params[i];
        out.penalty += lambda * diff.squaredNorm();
        out.grads.push_back(2.0 * lambda * diff);
    }
    return out;
}

TrainReport train(VminNet& net, const TrainSet& train_set, const TrainConfig& cfg,
                  const TrainSet* eval_set, const GradList* base_hidden) {
    cfg.validate();
    if (train_set.x.rows() != train_set.y.rows()) {
        throw DimensionError("training features and targets disagree on row count");
    }
    if (train_set.y.cols() != net.config.output_dim) {
        throw DimensionError("target has " + std::to_string(train_set.y.cols()) +
                             " patterns, model outputs " + std::to_string(net.config.output_dim));
    }

    const auto t0 = std::chrono::steady_clock::now();
    const Index n = train_set.x.rows();

    std::vector<ParamView> views = net.param_views();
    AdamState adam = make_adam_state(views, cfg.lr);

    std::vector<bool> skip(views.size(), false);
    for (std::size_t i = 0; i < views.size(); ++i) {
        skip[i] = cfg.freeze_mask.count(views[i].block) > 0;
    }

    std::vector<ParamView> hidden_views;
    for (const ParamView& v : views) {
        if (v.block == Block::Hidden) hidden_views.push_back(v);
    }
    std::vector<std::size_t> hidden_slots;
    for (std::size_t i = 0; i < views.size(); ++i) {
        if (views[i].block == Block::Hidden) hidden_slots.push_back(i);
    }
    const bool soft_penalty = cfg.lambda > 0.0 && base_hidden != nullptr;
    if (cfg.lambda > 0.0 && base_hidden == nullptr) {
        throw ConfigError("lambda > 0 requires a base parameter snapshot");
    }

    Rng batch_rng(mix_seed(cfg.seed, stream_tag("batches")));
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

    TrainReport report;
    report.seed = cfg.seed;
    report.frozen_blocks = cfg.freeze_mask;
    report.lambda = cfg.lambda;
    report.lr = cfg.lr;
    report.batch_size = cfg.batch_size;
    report.epoch_budget = cfg.epochs;
    report.early_stop_patience = cfg.early_stop_patience;

    double best_loss = std::numeric_limits<double>::infinity();
    std::int64_t since_best = 0;

    Matrix bx, by;
    for (std::int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        batch_rng.shuffle(order);
        double epoch_loss = 0.0;
        for (Index start = 0; start < n; start += cfg.batch_size) {
            const Index count = std::min<Index>(cfg.batch_size, n - start);
            bx.resize(count, train_set.x.cols());
            by.resize(count, train_set.y.cols());
            for (Index r = 0; r < count; ++r) {
                const Index src = order[static_cast<std::size_t>(start + r)];
                bx.row(r) = train_set.x.row(src);
                by.row(r) = train_set.y.row(src);
            }

            ForwardCache cache = net_forward_cached(net, bx);
            MseResult mse = mse_loss(cache.output, by);
            double batch_loss = mse.loss;
            GradList grads = net_backward(net, cache, mse.grad);

            if (soft_penalty) {
                L2Penalty pen = l2_to_base(hidden_views, *base_hidden, cfg.lambda);
                batch_loss += pen.penalty;
                for (std::size_t h = 0; h < hidden_slots.size(); ++h) {
                    grads[hidden_slots[h]] += pen.grads[h];
                }
            }

            if (!std::isfinite(batch_loss)) {
                throw TrainingError("training diverged: non-finite loss at epoch " +
                                    std::to_string(epoch) + " (lr=" + std::to_string(cfg.lr) + ")");
            }
            adam_step(views, grads, adam, skip);
            epoch_loss += batch_loss * static_cast<double>(count);
        }
        epoch_loss /= static_cast<double>(n);
        report.epoch_losses.push_back(epoch_loss);

        if (cfg.early_stop_patience) {
            if (epoch_loss < best_loss) {
                best_loss = epoch_loss;
                since_best = 0;
            } else if (++since_best >= *cfg.early_stop_patience) {
                break;
            }
        }
    }
    report.executed_epochs = static_cast<std::int64_t>(report.epoch_losses.size());
    report.final_train_loss = report.epoch_losses.back();

    if (eval_set != nullptr) {
        const Matrix pred = net_forward(net, eval_set->x);
        report.per_pattern_rmse_mv = per_pattern_rmse(pred, eval_set->y);
        report.aggregate_rmse_mv = pooled_rmse(pred, eval_set->y);
        report.pattern_names = eval_set->pattern_names;
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

void warm_start_output_bias(VminNet& net, MatrixRef train_targets) {
    if (train_targets.cols() != net.config.output_dim) {
        throw DimensionError("warm start: target has " + std::to_string(train_targets.cols()) +
                             " patterns, model outputs " +
                             std::to_string(net.config.output_dim));
    }
    net.output.bias = train_targets.colwise().mean().transpose();
}

Checkpoint pretrain(const TrainSet& train_set, const ModelConfig& config, const TrainConfig& cfg,
                    const NormStats& norm, const GroupSpec& groups, TrainReport& report,
                    const TrainSet* eval_set) {
    if (!cfg.freeze_mask.empty()) {
        throw ConfigError("pretraining must not freeze any block");
    }
    VminNet net = build_model(config, cfg.seed);
    warm_start_output_bias(net, train_set.y);
    report = train(net, train_set, cfg, eval_set);

    Checkpoint ckpt;
    ckpt.net = std::move(net);
    ckpt.norm = norm;
    ckpt.groups = groups;
    ckpt.meta.seed = cfg.seed;
    ckpt.meta.epochs = report.executed_epochs;
    ckpt.meta.final_loss = report.final_train_loss;
    ckpt.meta.target_mode = train_set.y.cols() == 1 ? "average" : "multi";
    return ckpt;
}

VminNet transplant(const Checkpoint& base_ckpt, const ModelConfig& target_config,
                   std::uint64_t seed) {
    target_config.validate();
    const ModelConfig& base = base_ckpt.net.config;
    auto dims_text = [](const std::vector<Index>& v) {
        std::string s = "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(v[i]);
        }
        return s + "]";
    };
    if (base.hidden_dims != target_config.hidden_dims) {
        throw TransplantError("hidden dims differ: base " + dims_text(base.hidden_dims) +
                              " vs target " + dims_text(target_config.hidden_dims));
    }
    if (base.embedding_dim != target_config.embedding_dim) {
        throw TransplantError("embedding output dim differs: base " +
                              std::to_string(base.embedding_dim) + " vs target " +
                              std::to_string(target_config.embedding_dim));
    }

    VminNet net = build_model(target_config, seed);
    for (std::size_t i = 0; i < net.hidden.size(); ++i) {
        net.hidden[i].weight = base_ckpt.net.hidden[i].weight;
        net.hidden[i].bias = base_ckpt.net.hidden[i].bias;
    }
    return net;
}

Checkpoint finetune(VminNet& net, const TrainSet& train_set, const TrainConfig& cfg,
                    const NormStats& norm, const GroupSpec& groups, TrainReport& report,
                    const TrainSet* eval_set, const Checkpoint* base_ckpt) {
    GradList base_hidden;
    const GradList* base_ptr = nullptr;
    if (cfg.lambda > 0.0) {
        if (base_ckpt == nullptr) {
            throw ConfigError("lambda > 0 requires the base checkpoint for the penalty");
        }
        for (const DenseLayer& l : base_ckpt->net.hidden) {
            base_hidden.emplace_back(Eigen::Map<const Vector>(l.weight.data(), l.weight.size()));
            base_hidden.push_back(l.bias);
        }
        base_ptr = &base_hidden;
    }

    report = train(net, train_set, cfg, eval_set, base_ptr);

    Checkpoint ckpt;
    ckpt.net = net;
    ckpt.norm = norm;
    ckpt.groups = groups;
    ckpt.meta.seed = cfg.seed;
    ckpt.meta.epochs = report.executed_epochs;
    ckpt.meta.final_loss = report.final_train_loss;
    ckpt.meta.target_mode = train_set.y.cols() == 1 ? "average" : "multi";
    return ckpt;
}

}  // namespace vmin
