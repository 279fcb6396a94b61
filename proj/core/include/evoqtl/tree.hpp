#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "evoqtl/rng.hpp"

namespace evoqtl {

// Per-column quantization of a feature matrix: sorted unique values plus a
// per-sample level index. Built once per model fit and shared by every tree;
// node scans then reduce to counting over levels, which is what makes tree
// ensembles cheap on encoded genotype columns (<= 3 levels each).
class FeatureLevels {
public:
    explicit FeatureLevels(const Eigen::MatrixXd& X);

    int n_features() const { return static_cast<int>(values_.size()); }
    int n_levels(int f) const { return static_cast<int>(values_[f].size()); }
    double level_value(int f, int level) const { return values_[f][level]; }
    std::span<const std::uint16_t> level_index(int f) const { return index_[f]; }

private:
    std::vector<std::vector<double>> values_;
    std::vector<std::vector<std::uint16_t>> index_;
};

struct TreeOptions {
    int max_depth = 3;
    int min_samples_split = 2;
    double feature_fraction = 1.0;  // candidate features per node
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;
    int left = -1;
    int right = -1;
};

// CART regression tree with variance-reduction splits.
class RegressionTree {
public:
    void fit(const FeatureLevels& levels, std::span<const double> y, std::span<const int> rows,
             const TreeOptions& options, Rng& rng);

    double predict_row(const Eigen::MatrixXd& X, Eigen::Index row) const;
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;

    // Accumulates per-feature impurity decrease into acc (size n_features).
    void add_importance(std::vector<double>& acc) const;

    bool empty() const { return nodes_.empty(); }
    const std::vector<TreeNode>& nodes() const { return nodes_; }

private:
    struct BuildContext;
    int build(BuildContext& ctx, std::vector<int>& rows, int depth);

    std::vector<TreeNode> nodes_;
    std::vector<std::pair<int, double>> split_gains_;  // (feature, impurity decrease)
};

struct ForestOptions {
    int n_trees = 100;
    int max_depth = 5;
    bool bootstrap = true;
    double feature_fraction = 1.0 / 3.0;
};

class RandomForestFit {
public:
    void fit(const Eigen::MatrixXd& X, std::span<const double> y, const ForestOptions& options,
             Rng& rng);
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
    std::vector<double> importances(int n_features) const;

private:
    std::vector<RegressionTree> trees_;
};

struct BoostingOptions {
    int n_trees = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
};

class GradientBoostingFit {
public:
    void fit(const Eigen::MatrixXd& X, std::span<const double> y, const BoostingOptions& options,
             Rng& rng);
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;

private:
    double base_ = 0.0;
    double learning_rate_ = 0.1;
    std::vector<RegressionTree> trees_;
};

}  // namespace evoqtl
