#pragma once

#include <vector>

#include "vmin/types.hpp"

namespace vmin {

/// Indices of the top-k features ranked by |Pearson correlation| with y,
/// descending; ties break toward the lower column index. Constant columns
/// get correlation 0. Throws ArgumentError when y has zero variance.
std::vector<Index> cfs_select(MatrixRef x, VectorRef y, Index k);

struct LinearModel {
    Vector weights;  // one per selected feature
    double intercept = 0.0;
    std::vector<Index> selected;  // column indices into the full feature matrix
    bool jittered = false;        // ridge jitter was needed for a degenerate system
};

/// Least squares on the selected columns via normal equations; a tiny
/// ridge jitter rescues (near-)singular systems (flagged on the model).
/// Throws RankError when the system stays unsolvable past the jitter.
LinearModel ols_fit(MatrixRef x_selected, VectorRef y);

/// Predicts from the full feature matrix using the stored column indices
/// (or from a pre-selected matrix when `selected` is empty).
Vector ols_predict(const LinearModel& model, MatrixRef x);

struct GbtParams {
    Index n_trees = 200;
    Index max_depth = 3;
    double shrinkage = 0.1;
    Index min_leaf = 5;
};

struct GbtNode {
    Index feature = -1;      // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;      // leaf prediction
    Index left = -1;
    Index right = -1;
};

struct GbtTree {
    std::vector<GbtNode> nodes;  // node 0 is the root
    double predict_row(MatrixRef x, Index row) const;
};

struct GbtModel {
    double init = 0.0;  // target mean
    double shrinkage = 0.1;
    std::vector<GbtTree> trees;
    std::vector<double> train_rmse_per_stage;  // after each boosting stage
};

/// Stage-wise least-squares boosting: each tree fits the current residuals
/// with exhaustive squared-error splits; prediction is
/// init + shrinkage * sum(tree outputs).
GbtModel gbt_fit(MatrixRef x, VectorRef y, const GbtParams& params);

Vector gbt_predict(const GbtModel& model, MatrixRef x);

}  // namespace vmin
