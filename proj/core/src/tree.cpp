#include "evoqtl/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace evoqtl {

FeatureLevels::FeatureLevels(const Eigen::MatrixXd& X) {
    const auto n = static_cast<std::size_t>(X.rows());
    const auto f_count = static_cast<std::size_t>(X.cols());
    values_.resize(f_count);
    index_.resize(f_count);

    std::vector<int> order(n);
    for (std::size_t f = 0; f < f_count; ++f) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return X(a, static_cast<Eigen::Index>(f)) < X(b, static_cast<Eigen::Index>(f));
        });
        auto& vals = values_[f];
        auto& idx = index_[f];
        idx.resize(n);
        for (int row : order) {
            const double v = X(row, static_cast<Eigen::Index>(f));
            if (vals.empty() || v != vals.back()) vals.push_back(v);
            idx[row] = static_cast<std::uint16_t>(vals.size() - 1);
        }
        if (vals.size() > 65535) throw std::runtime_error("FeatureLevels: too many unique values");
    }
}

struct RegressionTree::BuildContext {
    const FeatureLevels* levels = nullptr;
    std::span<const double> y;
    const TreeOptions* options = nullptr;
    Rng* rng = nullptr;
    std::vector<int> feature_pool;
    std::vector<double> level_sum;
    std::vector<int> level_count;
};

void RegressionTree::fit(const FeatureLevels& levels, std::span<const double> y,
                         std::span<const int> rows, const TreeOptions& options, Rng& rng) {
    nodes_.clear();
    split_gains_.clear();
    BuildContext ctx;
    ctx.levels = &levels;
    ctx.y = y;
    ctx.options = &options;
    ctx.rng = &rng;
    ctx.feature_pool.resize(levels.n_features());

    std::vector<int> active(rows.begin(), rows.end());
    if (active.empty()) throw std::invalid_argument("RegressionTree::fit: no rows");
    build(ctx, active, 0);
}

int RegressionTree::build(BuildContext& ctx, std::vector<int>& rows, int depth) {
    const auto n = static_cast<double>(rows.size());
    double sum = 0.0, sumsq = 0.0;
    for (int r : rows) {
        sum += ctx.y[r];
        sumsq += ctx.y[r] * ctx.y[r];
    }
    const double node_value = sum / n;
    const double parent_score = sum * sum / n;

    const int node_id = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{-1, 0.0, node_value, -1, -1});
    split_gains_.emplace_back(-1, 0.0);

    const TreeOptions& opt = *ctx.options;
    if (depth >= opt.max_depth || static_cast<int>(rows.size()) < opt.min_samples_split)
        return node_id;
    if (sumsq - parent_score <= 1e-12 * (1.0 + std::fabs(sumsq))) return node_id;

    // Candidate features, optionally subsampled per node.
    const int f_total = ctx.levels->n_features();
    int f_count = f_total;
    auto& pool = ctx.feature_pool;
    std::iota(pool.begin(), pool.end(), 0);
    if (opt.feature_fraction < 1.0) {
        f_count = std::max(1, static_cast<int>(std::lround(opt.feature_fraction * f_total)));
        for (int i = 0; i < f_count; ++i) {
            const int j = i + static_cast<int>(ctx.rng->next_below(f_total - i));
            std::swap(pool[i], pool[j]);
        }
    }

    double best_score = parent_score;
    int best_feature = -1, best_level = -1;
    for (int c = 0; c < f_count; ++c) {
        const int f = pool[c];
        const int u = ctx.levels->n_levels(f);
        if (u < 2) continue;
        auto idx = ctx.levels->level_index(f);
        ctx.level_sum.assign(u, 0.0);
        ctx.level_count.assign(u, 0);
        for (int r : rows) {
            const int l = idx[r];
            ctx.level_sum[l] += ctx.y[r];
            ++ctx.level_count[l];
        }
        double left_sum = 0.0;
        int left_n = 0;
        for (int l = 0; l + 1 < u; ++l) {
            left_sum += ctx.level_sum[l];
            left_n += ctx.level_count[l];
            if (left_n == 0) continue;
            const int right_n = static_cast<int>(rows.size()) - left_n;
            if (right_n == 0) break;
            const double right_sum = sum - left_sum;
            const double score = left_sum * left_sum / left_n + right_sum * right_sum / right_n;
            if (score > best_score) {
                best_score = score;
                best_feature = f;
                best_level = l;
            }
        }
    }

    const double gain = best_score - parent_score;
    if (best_feature < 0 || gain <= 1e-12 * (1.0 + std::fabs(sumsq))) return node_id;

    const double threshold = 0.5 * (ctx.levels->level_value(best_feature, best_level) +
                                    ctx.levels->level_value(best_feature, best_level + 1));

    auto idx = ctx.levels->level_index(best_feature);
    std::vector<int> left_rows, right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (int r : rows) {
        (idx[r] <= best_level ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const int left_id = build(ctx, left_rows, depth + 1);
    const int right_id = build(ctx, right_rows, depth + 1);
    nodes_[node_id].feature = best_feature;
    nodes_[node_id].threshold = threshold;
    nodes_[node_id].left = left_id;
    nodes_[node_id].right = right_id;
    split_gains_[node_id] = {best_feature, gain};
    return node_id;
}

double RegressionTree::predict_row(const Eigen::MatrixXd& X, Eigen::Index row) const {
    int node = 0;
    while (nodes_[node].feature >= 0) {
        node = X(row, nodes_[node].feature) <= nodes_[node].threshold ? nodes_[node].left
                                                                      : nodes_[node].right;
    }
    return nodes_[node].value;
}

Eigen::VectorXd RegressionTree::predict(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = predict_row(X, i);
    return out;
}

void RegressionTree::add_importance(std::vector<double>& acc) const {
    for (const auto& [feature, gain] : split_gains_)
        if (feature >= 0) acc[feature] += gain;
}

void RandomForestFit::fit(const Eigen::MatrixXd& X, std::span<const double> y,
                          const ForestOptions& options, Rng& rng) {
    const FeatureLevels levels(X);
    const auto n = static_cast<std::size_t>(X.rows());
    TreeOptions tree_opt;
    tree_opt.max_depth = options.max_depth;
    tree_opt.feature_fraction = options.feature_fraction;

    trees_.assign(options.n_trees, {});
    std::vector<int> rows(n);
    for (auto& tree : trees_) {
        if (options.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<int>(rng.next_below(n));
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        tree.fit(levels, y, rows, tree_opt, rng);
    }
}

Eigen::VectorXd RandomForestFit::predict(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(X.rows());
    for (const auto& tree : trees_) out += tree.predict(X);
    return out / static_cast<double>(trees_.size());
}

std::vector<double> RandomForestFit::importances(int n_features) const {
    std::vector<double> acc(n_features, 0.0);
    for (const auto& tree : trees_) tree.add_importance(acc);
    return acc;
}

void GradientBoostingFit::fit(const Eigen::MatrixXd& X, std::span<const double> y,
                              const BoostingOptions& options, Rng& rng) {
    const FeatureLevels levels(X);
    const auto n = static_cast<std::size_t>(X.rows());
    base_ = 0.0;
    for (double v : y) base_ += v;
    base_ /= static_cast<double>(n);
    learning_rate_ = options.learning_rate;

    std::vector<double> residual(y.begin(), y.end());
    for (auto& r : residual) r -= base_;

    std::vector<int> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    TreeOptions tree_opt;
    tree_opt.max_depth = options.max_depth;

    trees_.assign(options.n_trees, {});
    for (auto& tree : trees_) {
        tree.fit(levels, residual, rows, tree_opt, rng);
        for (std::size_t i = 0; i < n; ++i)
            residual[i] -= learning_rate_ * tree.predict_row(X, static_cast<Eigen::Index>(i));
    }
}

Eigen::VectorXd GradientBoostingFit::predict(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), base_);
    for (const auto& tree : trees_) out += learning_rate_ * tree.predict(X);
    return out;
}

}  // namespace evoqtl
