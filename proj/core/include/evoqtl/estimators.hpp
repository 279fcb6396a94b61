#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evoqtl/dataset.hpp"
#include "evoqtl/rng.hpp"
#include "evoqtl/tree.hpp"

namespace evoqtl {

enum class SelectorKind : std::uint8_t {
    VarianceThreshold,
    SelectPercentile,
    FamilyWiseError,
    L1Selection,
    TreeImportance,
    TreeSequential,
    BioFrequency,
};
constexpr int kSelectorKindCount = 7;

enum class RegressorKind : std::uint8_t {
    Linear,
    ElasticNet,
    SgdLinear,
    SupportVector,
    DecisionTree,
    RandomForest,
    GradientBoosting,
};
constexpr int kRegressorKindCount = 7;

std::string_view selector_name(SelectorKind kind);
std::string_view regressor_name(RegressorKind kind);

struct ParamGrid {
    std::string_view name;
    std::span<const double> values;
};

// Discrete hyperparameter grids; node tuning moves one index to a neighbour.
std::span<const ParamGrid> selector_grids(SelectorKind kind);
std::span<const ParamGrid> regressor_grids(RegressorKind kind);

namespace detail {
template <typename Spec>
bool spec_valid(const Spec& spec, std::span<const ParamGrid> grids) {
    for (std::size_t i = 0; i < spec.param_idx.size(); ++i) {
        const std::size_t limit = i < grids.size() ? grids[i].values.size() : 1;
        if (spec.param_idx[i] >= limit) return false;
    }
    return true;
}
template <typename Spec>
void spec_shift(Spec& spec, std::span<const ParamGrid> grids, Rng& rng) {
    if (grids.empty()) return;
    const auto p = static_cast<std::size_t>(rng.next_below(grids.size()));
    const auto size = grids[p].values.size();
    if (size < 2) return;
    const int dir = rng.bernoulli(0.5) ? 1 : -1;
    spec.param_idx[p] =
        static_cast<std::uint8_t>((spec.param_idx[p] + size + static_cast<std::size_t>(dir)) % size);
}
}  // namespace detail

struct SelectorSpec {
    SelectorKind kind = SelectorKind::VarianceThreshold;
    std::array<std::uint8_t, 2> param_idx{};

    double param(std::size_t i) const { return selector_grids(kind)[i].values[param_idx[i]]; }
    bool valid() const { return detail::spec_valid(*this, selector_grids(kind)); }
    void shift_param(Rng& rng) { detail::spec_shift(*this, selector_grids(kind), rng); }
    static SelectorSpec sample(Rng& rng);
    std::string describe() const;
    bool operator==(const SelectorSpec&) const = default;
};

struct RegressorSpec {
    RegressorKind kind = RegressorKind::Linear;
    std::array<std::uint8_t, 3> param_idx{};

    double param(std::size_t i) const { return regressor_grids(kind)[i].values[param_idx[i]]; }
    bool valid() const { return detail::spec_valid(*this, regressor_grids(kind)); }
    void shift_param(Rng& rng) { detail::spec_shift(*this, regressor_grids(kind), rng); }
    static RegressorSpec sample(Rng& rng);
    std::string describe() const;
    bool operator==(const RegressorSpec&) const = default;
};

// Original additive {0,1,2} codes backing the encoded feature columns; only
// the biological-frequency selector reads them.
struct RawGenotypeView {
    const GenotypeMatrix* matrix = nullptr;
    std::span<const int> cols;  // dataset column per feature

    bool available() const { return matrix != nullptr; }
};

struct UnivariateStat {
    double r2 = 0.0;
    double f = 0.0;
    double p = 1.0;
};

// Per-feature univariate regression F statistics (intercept + slope model).
std::vector<UnivariateStat> univariate_f_stats(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Retained feature indices, ascending. An empty result is a legal signal that
// the pipeline fails upstream.
std::vector<int> select_features(const SelectorSpec& spec, const Eigen::MatrixXd& X,
                                 const Eigen::VectorXd& y, const RawGenotypeView& raw, Rng& rng);

struct RegressorModel {
    virtual ~RegressorModel() = default;
    virtual Eigen::VectorXd predict(const Eigen::MatrixXd& X) const = 0;
};

class FittedModel {
public:
    FittedModel() = default;
    FittedModel(RegressorSpec spec, std::shared_ptr<const RegressorModel> impl, int n_features)
        : spec_(spec), impl_(std::move(impl)), n_features_(n_features) {}

    bool valid() const { return impl_ != nullptr; }
    const RegressorSpec& spec() const { return spec_; }
    int n_features() const { return n_features_; }
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;

private:
    RegressorSpec spec_;
    std::shared_ptr<const RegressorModel> impl_;
    int n_features_ = 0;
};

FittedModel fit_regressor(const RegressorSpec& spec, const Eigen::MatrixXd& X,
                          const Eigen::VectorXd& y, Rng& rng);

// 1 - SS_res/SS_tot on the supplied rows; non-finite predictions map to
// -infinity. Throws on zero phenotype variance.
double r2_score(const FittedModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Individual fitters, exposed so edge parameters outside the grids can be
// exercised directly.
struct LinearParams {
    Eigen::VectorXd coef;
    double intercept = 0.0;
};
LinearParams fit_linear_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
LinearParams fit_elastic_net(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha,
                             double l1_ratio);
LinearParams fit_sgd_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double step,
                            int epochs, Rng& rng);
LinearParams fit_linear_svr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double epsilon,
                            double cost, Rng& rng);

}  // namespace evoqtl
