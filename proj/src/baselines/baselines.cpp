#include "vmin/baselines/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vmin/errors.hpp"

namespace vmin {

std::vector<Index> cfs_select(MatrixRef x, VectorRef y, Index k) {
    if (k < 1 || k > x.cols()) {
        throw ArgumentError("cfs_select: k must lie in [1, feature count]");
    }
    if (x.rows() != y.size()) throw DimensionError("cfs_select: row count mismatch");
    const Index n = x.rows();
    const double y_mean = y.mean();
    const double y_var = (y.array() - y_mean).matrix().squaredNorm();
    if (y_var <= 0.0) throw ArgumentError("cfs_select: target has zero variance");

    Vector scores(x.cols());
    for (Index j = 0; j < x.cols(); ++j) {
        const double m = x.col(j).mean();
        Vector centered = x.col(j).array() - m;
        const double var = centered.squaredNorm();
        if (var <= 0.0) {
            scores[j] = 0.0;  // constant feature: defined as uncorrelated
            continue;
        }
        const double cov = centered.dot((y.array() - y_mean).matrix());
        scores[j] = std::abs(cov / std::sqrt(var * y_var));
    }

    std::vector<Index> order(static_cast<std::size_t>(x.cols()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return scores[a] > scores[b]; });
    order.resize(static_cast<std::size_t>(k));
    return order;
}

namespace {

/// Detects a (near-)singular positive semidefinite Gram matrix from the
/// LDLT pivots.
bool ldlt_degenerate(const Eigen::LDLT<Matrix>& ldlt) {
    if (ldlt.info() != Eigen::Success) return true;
    const Vector d = ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (!(dmax > 0.0)) return true;
    return d.minCoeff() < 1e-10 * dmax;
}

}  // namespace

LinearModel ols_fit(MatrixRef x_selected, VectorRef y) {
    if (x_selected.rows() != y.size()) throw DimensionError("ols_fit: row count mismatch");
    const Index n = x_selected.rows();
    const Index p = x_selected.cols() + 1;  // intercept column
    if (n <= p - 1) throw ArgumentError("ols_fit: need more rows than columns");

    Matrix design(n, p);
    design.col(0).setOnes();
    design.rightCols(p - 1) = x_selected;

    const Matrix gram = design.transpose() * design;
    const Vector rhs = design.transpose() * y;

    LinearModel model;
    Vector beta;
    Eigen::LDLT<Matrix> ldlt(gram);
    if (!ldlt_degenerate(ldlt)) {
        beta = ldlt.solve(rhs);
    }
    if (beta.size() == 0 || !beta.allFinite()) {
        // Near-singular: retry with a small ridge on the diagonal.
        const double jitter = 1e-10 * (gram.trace() / static_cast<double>(p) + 1.0);
        Matrix ridged = gram;
        ridged.diagonal().array() += jitter;
        Eigen::LDLT<Matrix> rescued(ridged);
        if (rescued.info() != Eigen::Success) {
            throw RankError("ols_fit: system singular beyond jitter rescue");
        }
        beta = rescued.solve(rhs);
        if (!beta.allFinite()) {
            throw RankError("ols_fit: system singular beyond jitter rescue");
        }
        model.jittered = true;
    }

    model.intercept = beta[0];
    model.weights = beta.tail(p - 1);
    return model;
}

Vector ols_predict(const LinearModel& model, MatrixRef x) {
    if (model.selected.empty()) {
        if (x.cols() != model.weights.size()) {
            throw DimensionError("ols_predict: feature count mismatch");
        }
        return (x * model.weights).array() + model.intercept;
    }
    Matrix sub(x.rows(), static_cast<Index>(model.selected.size()));
    for (std::size_t j = 0; j < model.selected.size(); ++j) {
        if (model.selected[j] >= x.cols()) {
            throw DimensionError("ols_predict: selected column out of range");
        }
        sub.col(static_cast<Index>(j)) = x.col(model.selected[j]);
    }
    return (sub * model.weights).array() + model.intercept;
}

double GbtTree::predict_row(MatrixRef x, Index row) const {
    Index at = 0;
    while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
        const GbtNode& node = nodes[static_cast<std::size_t>(at)];
        at = x(row, node.feature) <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(at)].value;
}

namespace {

struct SplitChoice {
    Index feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

/// Exhaustive best squared-error split over all features; candidate
/// thresholds are midpoints between consecutive sorted distinct values.
SplitChoice best_split(MatrixRef x, const Vector& residual, const std::vector<Index>& rows,
                       Index min_leaf) {
    SplitChoice best;
    const auto n = static_cast<Index>(rows.size());
    if (n < 2 * min_leaf) return best;

    double total_sum = 0.0;
    for (Index r : rows) total_sum += residual[r];

    std::vector<Index> sorted = rows;
    for (Index j = 0; j < x.cols(); ++j) {
        std::sort(sorted.begin(), sorted.end(),
                  [&](Index a, Index b) { return x(a, j) < x(b, j); });
        double left_sum = 0.0;
        for (Index i = 0; i + 1 < n; ++i) {
            left_sum += residual[sorted[static_cast<std::size_t>(i)]];
            const double v = x(sorted[static_cast<std::size_t>(i)], j);
            const double next = x(sorted[static_cast<std::size_t>(i + 1)], j);
            if (v == next) continue;
            const Index n_left = i + 1;
            const Index n_right = n - n_left;
            if (n_left < min_leaf || n_right < min_leaf) continue;
            // Variance-reduction gain; constant terms cancel.
            const double right_sum = total_sum - left_sum;
            const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                                right_sum * right_sum / static_cast<double>(n_right) -
                                total_sum * total_sum / static_cast<double>(n);
            if (gain > best.gain + 1e-12) {
                best.feature = j;
                best.threshold = 0.5 * (v + next);
                best.gain = gain;
            }
        }
    }
    return best;
}

Index grow_tree(GbtTree& tree, MatrixRef x, const Vector& residual, std::vector<Index> rows,
                Index depth, Index max_depth, Index min_leaf) {
    double mean = 0.0;
    for (Index r : rows) mean += residual[r];
    mean /= static_cast<double>(rows.size());

    const auto node_id = static_cast<Index>(tree.nodes.size());
    tree.nodes.push_back(GbtNode{.value = mean});

    if (depth >= max_depth) return node_id;
    const SplitChoice split = best_split(x, residual, rows, min_leaf);
    if (split.feature < 0) return node_id;

    std::vector<Index> left_rows, right_rows;
    for (Index r : rows) {
        (x(r, split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const Index left = grow_tree(tree, x, residual, std::move(left_rows), depth + 1, max_depth, min_leaf);
    const Index right = grow_tree(tree, x, residual, std::move(right_rows), depth + 1, max_depth, min_leaf);
    GbtNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return node_id;
}

}  // namespace

GbtModel gbt_fit(MatrixRef x, VectorRef y, const GbtParams& params) {
    if (x.rows() == 0 || x.cols() == 0) throw ArgumentError("gbt_fit: empty data");
    if (x.rows() != y.size()) throw DimensionError("gbt_fit: row count mismatch");
    if (params.n_trees < 1 || params.max_depth < 1 || params.min_leaf < 1) {
        throw ArgumentError("gbt_fit: n_trees, max_depth and min_leaf must be >= 1");
    }
    if (!(params.shrinkage > 0.0)) throw ArgumentError("gbt_fit: shrinkage must be > 0");

    GbtModel model;
    model.init = y.mean();
    model.shrinkage = params.shrinkage;

    Vector residual = y.array() - model.init;
    std::vector<Index> all_rows(static_cast<std::size_t>(x.rows()));
    std::iota(all_rows.begin(), all_rows.end(), Index{0});

    for (Index t = 0; t < params.n_trees; ++t) {
        GbtTree tree;
        grow_tree(tree, x, residual, all_rows, 0, params.max_depth, params.min_leaf);
        for (Index r = 0; r < x.rows(); ++r) {
            residual[r] -= params.shrinkage * tree.predict_row(x, r);
        }
        model.trees.push_back(std::move(tree));
        model.train_rmse_per_stage.push_back(
            std::sqrt(residual.squaredNorm() / static_cast<double>(x.rows())));
    }
    return model;
}

Vector gbt_predict(const GbtModel& model, MatrixRef x) {
    Vector pred = Vector::Constant(x.rows(), model.init);
    for (const GbtTree& tree : model.trees) {
        for (Index r = 0; r < x.rows(); ++r) {
            pred[r] += model.shrinkage * tree.predict_row(x, r);
        }
    }
    return pred;
}

}  // namespace vmin
