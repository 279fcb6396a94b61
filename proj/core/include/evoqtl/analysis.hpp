#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evoqtl/evolution.hpp"
#include "evoqtl/pipeline.hpp"

namespace evoqtl {

// Permutation feature importance: baseline r^2 minus the mean r^2 over
// n_permutations shuffles of each validate column.
std::vector<double> permutation_importance(const FittedModel& model,
                                           const Eigen::MatrixXd& validate_X,
                                           const Eigen::VectorXd& validate_y, int n_permutations,
                                           Rng& rng);

struct ConsistencyEntry {
    SnpLabel snp;
    double mean_rank = 0.0;
    double appearance_proportion = 0.0;
    double score = 0.0;  // appearance_proportion / mean_rank
    InheritanceModel modal_encoding = InheritanceModel::Additive;
};

struct PipelineImportances {
    std::vector<int> cols;  // complexity-contributing SNPs that were scored
    std::vector<double> pfi;
};

// Ranks each pipeline's scored SNPs by descending PFI (ties by ascending
// label) and aggregates mean rank / appearance proportion over the front.
std::vector<ConsistencyEntry> consistency_scores(std::span<const PipelineImportances> per_pipeline,
                                                 const SnpDb& db);

// Hypervolume of a front of (r2, complexity) points in the transformed
// objective square with reference point (0, 0). Complexity k maps to
// 1 - (k - 1) / 149, so k = 1 scores 1 and k = 150 scores 0. Throws if any
// member has negative r2.
double hypervolume(std::span<const std::pair<double, int>> front);

double complexity_to_objective(int complexity);

// Number of distinct bins touched by the front's complexity-contributing SNPs.
int snp_diversity(std::span<const Evaluated> front, const SnpDb& db);

struct QtlTarget {
    SnpLabel snp;
    std::int64_t window_bp = 1'000'000;
};

struct QtlHit {
    QtlTarget target;
    bool hit = false;
    std::optional<std::int64_t> precision_bp;  // min distance of in-window SNPs
};

std::vector<QtlHit> qtl_report(std::span<const SnpLabel> front_snps,
                               std::span<const QtlTarget> targets);

struct InheritanceFit {
    InheritanceModel model = InheritanceModel::Additive;
    bool mirrored = false;
    double correlation = 0.0;
};

// Best-fit strict model (over the eight models and their mirrors) by Pearson
// correlation between observed phenotype and codes scaled to its range.
// Requires all three genotype classes present and a non-constant phenotype.
InheritanceFit validate_inheritance(std::span<const std::int8_t> genotypes,
                                    std::span<const double> phenotype);

struct ReplicateConsistency {
    int replicate = 0;
    std::vector<ConsistencyEntry> entries;
};

struct Peak {
    SnpLabel representative;
    double mean_score = 0.0;
    int replicate_count = 0;
    InheritanceModel modal_encoding = InheritanceModel::Additive;
};

// Top-k SNPs by mean consistency score over SNPs seen in >= 2 replicates,
// merged into +/- window regions; each region reports its most replicated SNP.
std::vector<Peak> top_peaks(std::span<const ReplicateConsistency> replicates, int k = 50,
                            std::int64_t window_bp = 1'000'000);

// Extracts the nondominated subset (rank 0) of an evaluated set.
std::vector<Evaluated> extract_front(std::vector<Evaluated> population);

// Union of complexity-contributing SNP labels across front pipelines.
std::vector<SnpLabel> front_snp_labels(std::span<const Evaluated> front, const SnpDb& db);

// File emitters for the per-replicate summaries.
void write_pareto_front(std::span<const Evaluated> front, const SnpDb& db,
                        const std::string& path);
void write_consistency(std::span<const ConsistencyEntry> entries, const std::string& path);
void write_qtl_report(std::span<const QtlHit> hits, const std::string& path);

struct RunMetrics {
    double hypervolume = 0.0;
    int front_size = 0;
    int diversity = 0;
    double coverage = 0.0;
    double runtime_seconds = 0.0;
};
void write_metrics(const RunMetrics& metrics, const std::string& path);

}  // namespace evoqtl
