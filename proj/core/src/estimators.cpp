#include "evoqtl/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "evoqtl/stats.hpp"

namespace evoqtl {

namespace {

constexpr double kVarianceGrid[] = {0.0, 0.01, 0.05, 0.1};
constexpr double kPercentileGrid[] = {10, 25, 50, 75, 100};
constexpr double kFweAlphaGrid[] = {0.01, 0.05};
constexpr double kL1PenaltyGrid[] = {0.001, 0.01, 0.1};
constexpr double kImportanceTreesGrid[] = {50, 100};
constexpr double kSequentialKGrid[] = {10, 25, 50};
constexpr double kBioMafGrid[] = {0.01, 0.05};
constexpr double kBioClassFreqGrid[] = {0.01, 0.05};

constexpr double kEnetPenaltyGrid[] = {0.0001, 0.001, 0.01, 0.1};
constexpr double kEnetL1RatioGrid[] = {0.1, 0.5, 0.9};
constexpr double kSgdStepGrid[] = {0.001, 0.01};
constexpr double kSgdEpochsGrid[] = {100, 500};
constexpr double kSvrEpsilonGrid[] = {0.01, 0.1};
constexpr double kSvrCostGrid[] = {0.1, 1, 10};
constexpr double kTreeDepthGrid[] = {2, 3, 5, 8};
constexpr double kEnsembleTreesGrid[] = {50, 100, 200};
constexpr double kBoostRateGrid[] = {0.05, 0.1, 0.3};

const ParamGrid kSelectorGrids[kSelectorKindCount][2] = {
    {{"threshold", kVarianceGrid}},
    {{"percentile", kPercentileGrid}},
    {{"alpha", kFweAlphaGrid}},
    {{"penalty", kL1PenaltyGrid}},
    {{"trees", kImportanceTreesGrid}},
    {{"max_features", kSequentialKGrid}},
    {{"min_maf", kBioMafGrid}, {"min_class_freq", kBioClassFreqGrid}},
};
const std::size_t kSelectorGridCounts[kSelectorKindCount] = {1, 1, 1, 1, 1, 1, 2};

const ParamGrid kRegressorGrids[kRegressorKindCount][3] = {
    {},
    {{"penalty", kEnetPenaltyGrid}, {"l1_ratio", kEnetL1RatioGrid}},
    {{"step", kSgdStepGrid}, {"epochs", kSgdEpochsGrid}},
    {{"epsilon", kSvrEpsilonGrid}, {"cost", kSvrCostGrid}},
    {{"depth", kTreeDepthGrid}},
    {{"trees", kEnsembleTreesGrid}, {"depth", kTreeDepthGrid}},
    {{"trees", kEnsembleTreesGrid}, {"learning_rate", kBoostRateGrid}, {"depth", kTreeDepthGrid}},
};
const std::size_t kRegressorGridCounts[kRegressorKindCount] = {0, 2, 2, 2, 1, 2, 3};

constexpr std::string_view kSelectorNames[kSelectorKindCount] = {
    "variance_threshold", "select_percentile", "family_wise_error", "l1_selection",
    "tree_importance",    "tree_sequential",   "bio_frequency",
};
constexpr std::string_view kRegressorNames[kRegressorKindCount] = {
    "linear",        "elastic_net",   "sgd_linear",        "support_vector",
    "decision_tree", "random_forest", "gradient_boosting",
};

template <typename Spec>
std::string describe_spec(std::string_view name, const Spec& spec,
                          std::span<const ParamGrid> grids) {
    std::string out(name);
    out += '(';
    for (std::size_t i = 0; i < grids.size(); ++i) {
        if (i) out += ',';
        out += grids[i].name;
        out += '=';
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", spec.param(i));
        out += buf;
    }
    out += ')';
    return out;
}

}  // namespace

std::string_view selector_name(SelectorKind kind) {
    return kSelectorNames[static_cast<std::size_t>(kind)];
}
std::string_view regressor_name(RegressorKind kind) {
    return kRegressorNames[static_cast<std::size_t>(kind)];
}

std::span<const ParamGrid> selector_grids(SelectorKind kind) {
    const auto k = static_cast<std::size_t>(kind);
    return {kSelectorGrids[k], kSelectorGridCounts[k]};
}
std::span<const ParamGrid> regressor_grids(RegressorKind kind) {
    const auto k = static_cast<std::size_t>(kind);
    return {kRegressorGrids[k], kRegressorGridCounts[k]};
}

SelectorSpec SelectorSpec::sample(Rng& rng) {
    SelectorSpec spec;
    spec.kind = static_cast<SelectorKind>(rng.next_below(kSelectorKindCount));
    const auto grids = selector_grids(spec.kind);
    for (std::size_t i = 0; i < grids.size(); ++i)
        spec.param_idx[i] = static_cast<std::uint8_t>(rng.next_below(grids[i].values.size()));
    return spec;
}

RegressorSpec RegressorSpec::sample(Rng& rng) {
    RegressorSpec spec;
    spec.kind = static_cast<RegressorKind>(rng.next_below(kRegressorKindCount));
    const auto grids = regressor_grids(spec.kind);
    for (std::size_t i = 0; i < grids.size(); ++i)
        spec.param_idx[i] = static_cast<std::uint8_t>(rng.next_below(grids[i].values.size()));
    return spec;
}

std::string SelectorSpec::describe() const {
    return describe_spec(selector_name(kind), *this, selector_grids(kind));
}
std::string RegressorSpec::describe() const {
    return describe_spec(regressor_name(kind), *this, regressor_grids(kind));
}

std::vector<UnivariateStat> univariate_f_stats(const Eigen::MatrixXd& X,
                                               const Eigen::VectorXd& y) {
    const auto n = static_cast<double>(X.rows());
    if (X.rows() < 3) throw std::invalid_argument("univariate_f_stats: need n >= 3");
    std::vector<UnivariateStat> out(static_cast<std::size_t>(X.cols()));

    const double ym = y.mean();
    const double syy = (y.array() - ym).square().sum();
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const auto x = X.col(j);
        const double xm = x.mean();
        const double sxx = (x.array() - xm).square().sum();
        if (sxx == 0.0 || syy == 0.0) continue;  // F=0, p=1
        const double sxy = ((x.array() - xm) * (y.array() - ym)).sum();
        const double r2 = (sxy * sxy) / (sxx * syy);
        auto& stat = out[static_cast<std::size_t>(j)];
        stat.r2 = r2;
        if (r2 >= 1.0) {
            stat.f = std::numeric_limits<double>::infinity();
            stat.p = 0.0;
        } else {
            stat.f = r2 * (n - 2.0) / (1.0 - r2);
            stat.p = stats::student_t_two_sided_p(std::sqrt(stat.f), n - 2.0);
        }
    }
    return out;
}

namespace {

std::vector<int> all_indices(Eigen::Index count) {
    std::vector<int> idx(static_cast<std::size_t>(count));
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

std::vector<int> select_variance_threshold(const Eigen::MatrixXd& X, double threshold) {
    std::vector<int> keep;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double m = X.col(j).mean();
        const double var = (X.col(j).array() - m).square().sum() / static_cast<double>(X.rows());
        if (var >= threshold) keep.push_back(static_cast<int>(j));
    }
    return keep;
}

std::vector<int> select_percentile(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   double percentile) {
    const auto stats_by_feature = univariate_f_stats(X, y);
    const auto f_count = static_cast<std::size_t>(X.cols());
    const auto k = static_cast<std::size_t>(
        std::ceil(percentile / 100.0 * static_cast<double>(f_count)));
    if (k >= f_count) return all_indices(X.cols());

    auto order = all_indices(X.cols());
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return stats_by_feature[a].f > stats_by_feature[b].f;
    });
    std::vector<int> keep(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(keep.begin(), keep.end());
    return keep;
}

std::vector<int> select_fwe(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha) {
    const auto stats_by_feature = univariate_f_stats(X, y);
    const auto m = static_cast<double>(X.cols());
    std::vector<int> keep;
    for (std::size_t j = 0; j < stats_by_feature.size(); ++j)
        if (stats_by_feature[j].p * m < alpha) keep.push_back(static_cast<int>(j));
    return keep;
}

std::vector<int> select_l1(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double penalty) {
    const LinearParams fit = fit_elastic_net(X, y, penalty, 1.0);
    std::vector<int> keep;
    for (Eigen::Index j = 0; j < fit.coef.size(); ++j)
        if (std::fabs(fit.coef[j]) > 1e-10) keep.push_back(static_cast<int>(j));
    return keep;
}

std::vector<int> select_tree_importance(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        int n_trees, Rng& rng) {
    RandomForestFit forest;
    ForestOptions opt;
    opt.n_trees = n_trees;
    opt.max_depth = 5;
    std::vector<double> target(y.data(), y.data() + y.size());
    forest.fit(X, target, opt, rng);
    const auto imp = forest.importances(static_cast<int>(X.cols()));
    const double mean_imp =
        std::accumulate(imp.begin(), imp.end(), 0.0) / static_cast<double>(imp.size());
    std::vector<int> keep;
    for (std::size_t j = 0; j < imp.size(); ++j)
        if (imp[j] > mean_imp) keep.push_back(static_cast<int>(j));
    return keep;
}

// Greedy forward selection scored by held-out-fold r^2 of a shallow tree.
std::vector<int> select_tree_sequential(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        int max_features, Rng& rng) {
    const auto n = static_cast<std::size_t>(X.rows());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const std::size_t fit_n = std::max<std::size_t>(1, (n * 3) / 4);
    if (fit_n == n) return all_indices(X.cols());
    std::vector<int> fit_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(fit_n));
    std::vector<int> score_rows(order.begin() + static_cast<std::ptrdiff_t>(fit_n), order.end());

    std::vector<double> target(y.data(), y.data() + y.size());
    std::vector<double> score_y;
    score_y.reserve(score_rows.size());
    for (int r : score_rows) score_y.push_back(y[r]);
    const double score_mean =
        std::accumulate(score_y.begin(), score_y.end(), 0.0) / static_cast<double>(score_y.size());
    double ss_tot = 0.0;
    for (double v : score_y) ss_tot += (v - score_mean) * (v - score_mean);

    auto fold_r2 = [&](const std::vector<int>& features) {
        Eigen::MatrixXd sub(X.rows(), static_cast<Eigen::Index>(features.size()));
        for (std::size_t j = 0; j < features.size(); ++j)
            sub.col(static_cast<Eigen::Index>(j)) = X.col(features[j]);
        const FeatureLevels levels(sub);
        RegressionTree tree;
        TreeOptions opt;
        opt.max_depth = 3;
        Rng tree_rng(0);  // depth-limited full-feature tree draws nothing
        tree.fit(levels, target, fit_rows, opt, tree_rng);
        double ss_res = 0.0;
        for (std::size_t i = 0; i < score_rows.size(); ++i) {
            const double pred = tree.predict_row(sub, score_rows[i]);
            ss_res += (score_y[i] - pred) * (score_y[i] - pred);
        }
        return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : -std::numeric_limits<double>::infinity();
    };

    const auto budget = std::min<std::size_t>(static_cast<std::size_t>(max_features),
                                              static_cast<std::size_t>(X.cols()));
    std::vector<int> selected;
    std::vector<char> used(static_cast<std::size_t>(X.cols()), 0);
    std::vector<int> trial;
    while (selected.size() < budget) {
        int best_feature = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            trial = selected;
            trial.push_back(static_cast<int>(j));
            const double score = fold_r2(trial);
            if (score > best_score) {
                best_score = score;
                best_feature = static_cast<int>(j);
            }
        }
        if (best_feature < 0) break;
        selected.push_back(best_feature);
        used[static_cast<std::size_t>(best_feature)] = 1;
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

std::vector<int> select_bio_frequency(const RawGenotypeView& raw, std::size_t n_features,
                                      double min_maf, double min_class_freq) {
    if (!raw.available())
        throw std::logic_error("bio_frequency selector requires raw genotype columns");
    std::vector<int> keep;
    for (std::size_t j = 0; j < n_features; ++j) {
        auto col = raw.matrix->col(static_cast<std::size_t>(raw.cols[j]));
        const double maf = minor_allele_frequency(col);
        std::array<std::int64_t, 3> counts{0, 0, 0};
        for (std::int8_t g : col)
            if (g >= 0) ++counts[g];
        const double n = static_cast<double>(counts[0] + counts[1] + counts[2]);
        const double min_freq =
            static_cast<double>(*std::min_element(counts.begin(), counts.end())) / n;
        if (maf >= min_maf && min_freq >= min_class_freq) keep.push_back(static_cast<int>(j));
    }
    return keep;
}

}  // namespace

std::vector<int> select_features(const SelectorSpec& spec, const Eigen::MatrixXd& X,
                                 const Eigen::VectorXd& y, const RawGenotypeView& raw, Rng& rng) {
    if (X.cols() == 0) return {};
    switch (spec.kind) {
        case SelectorKind::VarianceThreshold:
            return select_variance_threshold(X, spec.param(0));
        case SelectorKind::SelectPercentile:
            return select_percentile(X, y, spec.param(0));
        case SelectorKind::FamilyWiseError:
            return select_fwe(X, y, spec.param(0));
        case SelectorKind::L1Selection:
            return select_l1(X, y, spec.param(0));
        case SelectorKind::TreeImportance:
            return select_tree_importance(X, y, static_cast<int>(spec.param(0)), rng);
        case SelectorKind::TreeSequential:
            return select_tree_sequential(X, y, static_cast<int>(spec.param(0)), rng);
        case SelectorKind::BioFrequency:
            return select_bio_frequency(raw, static_cast<std::size_t>(X.cols()), spec.param(0),
                                        spec.param(1));
    }
    throw std::logic_error("unknown selector kind");
}

namespace {

struct LinearFormModel : RegressorModel {
    LinearParams params;
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override {
        return (X * params.coef).array() + params.intercept;
    }
};

struct TreeModel : RegressorModel {
    RegressionTree tree;
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override { return tree.predict(X); }
};

struct ForestModel : RegressorModel {
    RandomForestFit forest;
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override { return forest.predict(X); }
};

struct BoostedModel : RegressorModel {
    GradientBoostingFit boosting;
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override {
        return boosting.predict(X);
    }
};

}  // namespace

Eigen::VectorXd FittedModel::predict(const Eigen::MatrixXd& X) const {
    if (!impl_) throw std::logic_error("FittedModel::predict on an empty model");
    if (X.cols() != n_features_)
        throw std::invalid_argument("FittedModel::predict: feature count mismatch");
    return impl_->predict(X);
}

LinearParams fit_linear_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const Eigen::Index n = X.rows(), f = X.cols();
    Eigen::MatrixXd design(n, f + 1);
    design.col(0).setOnes();
    design.rightCols(f) = X;

    Eigen::MatrixXd gram = design.transpose() * design;
    const Eigen::VectorXd rhs = design.transpose() * y;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    const Eigen::VectorXd d = ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    const double dmin = d.cwiseAbs().minCoeff();
    if (!(dmax > 0.0) || dmin <= 1e-12 * dmax || d.minCoeff() < 0.0) {
        // singular normal equations: ridge jitter
        gram.diagonal().array() += 1e-8;
        ldlt.compute(gram);
    }
    const Eigen::VectorXd beta = ldlt.solve(rhs);

    LinearParams params;
    params.intercept = beta[0];
    params.coef = beta.tail(f);
    return params;
}

LinearParams fit_elastic_net(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha,
                             double l1_ratio) {
    const Eigen::Index n = X.rows(), f = X.cols();
    const Eigen::RowVectorXd x_mean = X.colwise().mean();
    const double y_mean = y.mean();
    const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
    const Eigen::VectorXd yc = y.array() - y_mean;

    const double nd = static_cast<double>(n);
    Eigen::VectorXd col_scale(f);
    for (Eigen::Index j = 0; j < f; ++j) col_scale[j] = Xc.col(j).squaredNorm() / nd;

    const double l1 = alpha * l1_ratio;
    const double l2 = alpha * (1.0 - l1_ratio);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(f);
    Eigen::VectorXd residual = yc;

    constexpr int kMaxPasses = 1000;
    for (int pass = 0; pass < kMaxPasses; ++pass) {
        double max_delta = 0.0, max_w = 0.0;
        for (Eigen::Index j = 0; j < f; ++j) {
            if (col_scale[j] == 0.0) continue;
            const double w_old = w[j];
            const double z = Xc.col(j).dot(residual) / nd + col_scale[j] * w_old;
            const double w_new =
                std::copysign(std::max(std::fabs(z) - l1, 0.0), z) / (col_scale[j] + l2);
            if (w_new != w_old) {
                residual += Xc.col(j) * (w_old - w_new);
                w[j] = w_new;
            }
            max_delta = std::max(max_delta, std::fabs(w_new - w_old));
            max_w = std::max(max_w, std::fabs(w_new));
        }
        if (max_delta <= 1e-8 * std::max(1.0, max_w)) break;
    }

    LinearParams params;
    params.coef = w;
    params.intercept = y_mean - x_mean.dot(w);
    return params;
}

LinearParams fit_sgd_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double step,
                            int epochs, Rng& rng) {
    const auto n = static_cast<std::size_t>(X.rows());
    const Eigen::Index f = X.cols();
    constexpr std::size_t kBatch = 32;

    Eigen::VectorXd w = Eigen::VectorXd::Zero(f);
    double b = y.mean();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += kBatch) {
            const std::size_t stop = std::min(start + kBatch, n);
            const double inv = 2.0 / static_cast<double>(stop - start);
            Eigen::VectorXd grad_w = Eigen::VectorXd::Zero(f);
            double grad_b = 0.0;
            for (std::size_t i = start; i < stop; ++i) {
                const int r = order[i];
                const double err = X.row(r).dot(w) + b - y[r];
                grad_w += err * X.row(r).transpose();
                grad_b += err;
            }
            w -= step * inv * grad_w;
            b -= step * inv * grad_b;
        }
    }

    LinearParams params;
    params.coef = std::move(w);
    params.intercept = b;
    return params;
}

LinearParams fit_linear_svr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double epsilon,
                            double cost, Rng& rng) {
    const auto n = static_cast<std::size_t>(X.rows());
    const Eigen::Index f = X.cols();

    // epsilon is calibrated to a standardized target, so fit on (y - mu) / sd.
    const double y_mean = y.mean();
    const double y_sd = std::sqrt((y.array() - y_mean).square().sum() / static_cast<double>(n));
    const double scale = y_sd > 0.0 ? y_sd : 1.0;

    const double lambda = 1.0 / (cost * static_cast<double>(n));
    constexpr int kEpochs = 200;
    constexpr double kStep = 0.01;

    Eigen::VectorXd w = Eigen::VectorXd::Zero(f);
    double b = 0.0;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < kEpochs; ++epoch) {
        rng.shuffle(order);
        for (int r : order) {
            const double target = (y[r] - y_mean) / scale;
            const double err = target - (X.row(r).dot(w) + b);
            w *= 1.0 - kStep * lambda;
            if (std::fabs(err) > epsilon) {
                const double sign = err > 0.0 ? 1.0 : -1.0;
                w += kStep * sign * X.row(r).transpose();
                b += kStep * sign;
            }
        }
    }

    LinearParams params;
    params.coef = scale * w;
    params.intercept = scale * b + y_mean;
    return params;
}

FittedModel fit_regressor(const RegressorSpec& spec, const Eigen::MatrixXd& X,
                          const Eigen::VectorXd& y, Rng& rng) {
    if (X.rows() != y.size() || X.rows() < 2)
        throw std::invalid_argument("fit_regressor: need matching X/y with n >= 2");
    const int n_features = static_cast<int>(X.cols());
    std::vector<double> target(y.data(), y.data() + y.size());

    switch (spec.kind) {
        case RegressorKind::Linear: {
            auto model = std::make_shared<LinearFormModel>();
            model->params = fit_linear_ols(X, y);
            return {spec, model, n_features};
        }
        case RegressorKind::ElasticNet: {
            auto model = std::make_shared<LinearFormModel>();
            model->params = fit_elastic_net(X, y, spec.param(0), spec.param(1));
            return {spec, model, n_features};
        }
        case RegressorKind::SgdLinear: {
            auto model = std::make_shared<LinearFormModel>();
            model->params = fit_sgd_linear(X, y, spec.param(0), static_cast<int>(spec.param(1)), rng);
            return {spec, model, n_features};
        }
        case RegressorKind::SupportVector: {
            auto model = std::make_shared<LinearFormModel>();
            model->params = fit_linear_svr(X, y, spec.param(0), spec.param(1), rng);
            return {spec, model, n_features};
        }
        case RegressorKind::DecisionTree: {
            auto model = std::make_shared<TreeModel>();
            const FeatureLevels levels(X);
            std::vector<int> rows(static_cast<std::size_t>(X.rows()));
            std::iota(rows.begin(), rows.end(), 0);
            TreeOptions opt;
            opt.max_depth = static_cast<int>(spec.param(0));
            model->tree.fit(levels, target, rows, opt, rng);
            return {spec, model, n_features};
        }
        case RegressorKind::RandomForest: {
            auto model = std::make_shared<ForestModel>();
            ForestOptions opt;
            opt.n_trees = static_cast<int>(spec.param(0));
            opt.max_depth = static_cast<int>(spec.param(1));
            model->forest.fit(X, target, opt, rng);
            return {spec, model, n_features};
        }
        case RegressorKind::GradientBoosting: {
            auto model = std::make_shared<BoostedModel>();
            BoostingOptions opt;
            opt.n_trees = static_cast<int>(spec.param(0));
            opt.learning_rate = spec.param(1);
            opt.max_depth = static_cast<int>(spec.param(2));
            model->boosting.fit(X, target, opt, rng);
            return {spec, model, n_features};
        }
    }
    throw std::logic_error("unknown regressor kind");
}

double r2_score(const FittedModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const Eigen::VectorXd pred = model.predict(X);
    if (!pred.allFinite()) return -std::numeric_limits<double>::infinity();
    return stats::r2_out_of_sample({pred.data(), static_cast<std::size_t>(pred.size())},
                                   {y.data(), static_cast<std::size_t>(y.size())});
}

}  // namespace evoqtl
