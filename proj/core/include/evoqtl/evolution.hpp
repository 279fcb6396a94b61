#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "evoqtl/pipeline.hpp"

namespace evoqtl {

struct EvolutionConfig {
    int population_size = 150;
    int generations = 100;
    int min_snps = 50;
    int max_snps = 150;
    int bin_size = 500;
    double p_crossover = 0.5;
    double p_mutation = 0.5;
    std::array<double, 3> p_locality{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    double p_smart = 0.25;
    double p_random = 0.75;
    double p_node_tuning = 0.5;
    double ld_alpha = 0.05;  // conditional-analysis significance level
    std::uint64_t seed = 0;
    int workers = 1;

    // Ablation switches driven by the run mode.
    bool use_ld_node = true;    // basic-gp drops the LD node entirely
    bool smart_enabled = true;  // basic-gp recommends at random only

    void validate() const;
};

struct OpLedger {
    std::uint64_t evaluations = 0;
    std::uint64_t failed_evaluations = 0;
    std::uint64_t construction_failures = 0;
    std::uint64_t crossover_ops = 0;
    std::uint64_t mutation_ops = 0;
    std::uint64_t node_tuning_ops = 0;
    std::array<std::uint64_t, 3> locality_draws{0, 0, 0};
    std::uint64_t ld_groups_processed = 0;
};

struct Evaluated {
    Pipeline pipeline;
    EvalResult eval;
};

// Eq.-style dominance on (maximize r2, minimize complexity).
bool dominates(const EvalResult& a, const EvalResult& b);

// Fast nondominated sort; fronts hold indices into the population.
std::vector<std::vector<int>> nondominated_sort(std::span<const Evaluated> population);

// Deb crowding over the two objectives for one front; boundary members +inf.
std::vector<double> crowding_distance(std::span<const Evaluated> population,
                                      const std::vector<int>& front);

struct Ranking {
    std::vector<int> front_rank;
    std::vector<double> crowding;
};
Ranking rank_population(std::span<const Evaluated> population);

// Pair comparison used by the binary tournament: lower rank wins, ties go to
// higher crowding, remaining ties to a coin flip.
int tournament_compare(const Ranking& ranking, int a, int b, Rng& rng);

// Binary nondominated tournament over two uniform draws.
int tournament_select(const Ranking& ranking, std::size_t pop_size, Rng& rng);

struct ConstructionFailed {};

// Offspring via mutation of a single parent: inherits nodes and surviving
// SNPs, optionally tunes one node hyperparameter, then extends the SNP set
// with recommendations anchored on the inherited SNPs.
std::optional<Pipeline> offspring_mutation(const Evaluated& parent, const SnpDb& db,
                                           const EvolutionConfig& cfg, Rng& rng, OpLedger& ledger);

// Offspring via crossover of two parents; may additionally mutate.
std::optional<Pipeline> offspring_crossover(const Evaluated& pa, const Evaluated& pb,
                                            const SnpDb& db, const EvolutionConfig& cfg, Rng& rng,
                                            OpLedger& ledger);

// Collapses offspring whose exact survivor sets match; keeps one per group
// uniformly at random, preserving input order otherwise.
std::vector<Evaluated> dedup_offspring(std::vector<Evaluated> offspring, Rng& rng);

// NSGA-II style truncation applied to offspring only.
std::vector<Evaluated> survival_select(std::vector<Evaluated> offspring, int size);

struct GenerationStats {
    int generation = 0;
    std::uint64_t evaluations = 0;
    int front0_size = 0;
    double best_r2 = 0.0;
    int best_complexity = 0;
};

struct EvolveResult {
    std::vector<Evaluated> population;
    std::vector<GenerationStats> history;
    OpLedger ledger;
};

struct EvolveAborted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Algorithm: initialize, Process_SNP, evaluate, Pruned_SNP, then per
// generation build 2*size offspring, repeat the SNP/evaluate/prune steps and
// keep `size` offspring by survival selection.
EvolveResult evolve(const EvolutionConfig& cfg, const DataSplit& split, SnpDb& db);

// Shared helpers reused by the random-control mode.
Pipeline random_pipeline(const SnpDb& db, int n_snps, Rng& rng);
void process_snps(std::span<const Pipeline> pipelines, const DataSplit& split, SnpDb& db,
                  int workers);
std::vector<EvalResult> evaluate_all(std::span<const Pipeline> pipelines, const DataSplit& split,
                                     const SnpDb& db, const EvalOptions& options, int workers);

}  // namespace evoqtl
