#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evoqtl/analysis.hpp"
#include "evoqtl/evolution.hpp"
#include "evoqtl/synth.hpp"

namespace evoqtl {

enum class Mode : std::uint8_t { Starbase, BasicGp, Random };

std::string_view mode_name(Mode mode);
std::optional<Mode> mode_from_name(std::string_view name);

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RunAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    Mode mode = Mode::Starbase;
    std::string dataset_path;
    std::string output_dir;
    EvolutionConfig evo;
    double qc_max_missing = 0.05;
    double qc_min_maf = 0.01;
    double split_fraction = 0.5;
    std::uint64_t budget = 0;  // random mode; 0 derives size + gens * 2 * size
    std::string targets_path;
    std::int64_t qtl_window_bp = 1'000'000;
    int pfi_permutations = 100;

    std::uint64_t derived_budget() const {
        return budget != 0u ? budget
                            : static_cast<std::uint64_t>(evo.population_size) +
                                  static_cast<std::uint64_t>(evo.generations) * 2u *
                                      static_cast<std::uint64_t>(evo.population_size);
    }
};

// Plain-text key-value configuration (key = value, '#' comments). Keys mirror
// the run parameters: population_size, generations, min_snps, max_snps,
// bin_size, crossover, mutation, smart, random, tuning, within_bin,
// within_chromosome, outside_chromosome, alpha, ld_r2_grid, d_max_grid,
// qc_max_missing, qc_min_maf, split_fraction, budget, qtl_window_bp,
// pfi_permutations, mode, seed, workers. Throws ConfigError on bad input.
void apply_config_file(RunConfig& cfg, const std::string& path);
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

struct LedgerSnapshot {
    OpLedger ops;
    SnpDb::Counters db;
};

struct RunSummary {
    RunMetrics metrics;
    LedgerSnapshot ledger;
    std::vector<QtlHit> qtl_hits;
    std::vector<ConsistencyEntry> consistency;
    double qtl_accuracy = 0.0;                 // hits / targets (0 when no targets)
    std::optional<double> qtl_mean_precision;  // mean distance over hit targets
    int front_size = 0;
};

// One replicate: load + QC + bins + split + impute, dispatch the mode, then
// run the analysis exports into cfg.output_dir.
RunSummary run(const RunConfig& cfg);

std::vector<QtlTarget> load_targets(const std::string& path, std::int64_t window_bp);

struct SweepSummary {
    std::vector<RunSummary> replicates;
    std::vector<Peak> peaks;
    std::vector<std::string> failures;
};

// Runs n replicates with derived seeds into output_dir/replicate_<i>/ and
// writes aggregate.csv, cross_consistency.csv and peaks.csv. Sibling
// replicates keep running when one fails; failures are rethrown afterwards.
SweepSummary replicate_sweep(const RunConfig& cfg, int n_replicates,
                             bool identical_seeds = false);

// Rebuilds the sweep aggregate from previously written replicate directories.
SweepSummary aggregate_from_directories(const std::vector<std::string>& replicate_dirs,
                                        const std::string& output_dir);

}  // namespace evoqtl
