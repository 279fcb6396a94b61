#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evoqtl/dataset.hpp"
#include "evoqtl/estimators.hpp"
#include "evoqtl/snp_db.hpp"

namespace evoqtl {

inline constexpr double kLdR2Grid[] = {0.50, 0.55, 0.60, 0.65, 0.70,
                                       0.75, 0.80, 0.85, 0.90, 0.95};
inline constexpr double kLdDmaxGrid[] = {500'000, 600'000, 700'000, 800'000, 900'000, 1'000'000};

struct LdParams {
    std::uint8_t r2_idx = 0;
    std::uint8_t dmax_idx = 0;
    double alpha = 0.05;

    double r2_threshold() const { return kLdR2Grid[r2_idx]; }
    std::int64_t d_max() const { return static_cast<std::int64_t>(kLdDmaxGrid[dmax_idx]); }

    static LdParams sample(Rng& rng);
    void shift_param(Rng& rng);  // moves r2 or d_max to an adjacent grid value
    bool operator==(const LdParams&) const = default;
};

struct Pipeline {
    std::vector<int> snps;  // dataset columns, kept sorted by label
    LdParams ld;
    SelectorSpec selector;
    RegressorSpec regressor;
    std::uint64_t seed = 0;
};

struct EvalResult {
    double r2 = 0.0;
    int complexity = 0;
    std::vector<int> pruned;     // removed by the LD node
    std::vector<int> survivors;  // columns that reached the regressor
    bool failed = true;
    std::string fail_reason;
    int ld_groups_processed = 0;
};

struct LdGroup {
    std::int32_t chromosome = 0;
    std::vector<int> members;  // ascending position
};

// Per chromosome: sort by position, start at the most upstream SNP and append
// while adjacent gaps stay within d_max.
std::vector<LdGroup> build_ld_groups(std::span<const int> snp_cols,
                                     const std::vector<SnpLabel>& labels, std::int64_t d_max);

// Pairwise pruning on additive train codes: position-ordered pairs whose
// squared Pearson correlation exceeds the threshold lose the member with the
// lower stored marginal validation r2; dropped SNPs leave later comparisons.
std::vector<int> prune_pairwise(const LdGroup& group, const GenotypeMatrix& train_genotypes,
                                const SnpDb& db, double r2_threshold);

// Wald conditional analysis within one LD group: the highest-marginal-r2 SNP
// anchors; each other member is kept iff its coefficient stays significant
// (BH-FDR adjusted within the group) with the anchor as covariate.
std::vector<int> conditional_analysis(std::span<const int> retained, const DataSplit& split,
                                      const SnpDb& db, double alpha);

struct EvalArtifacts {
    FittedModel model;
    Eigen::MatrixXd validate_matrix;  // encoded validate columns of the survivors
    Eigen::VectorXd validate_phenotype;
    std::vector<int> survivor_cols;
};

struct EvalOptions {
    bool use_ld_node = true;
};

EvalResult evaluate_pipeline(const Pipeline& p, const DataSplit& split, const SnpDb& db,
                             const EvalOptions& options = {}, EvalArtifacts* artifacts = nullptr);

}  // namespace evoqtl
