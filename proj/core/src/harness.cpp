#include "evoqtl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <thread>

#include "evoqtl/csv.hpp"
#include "evoqtl/parallel.hpp"

namespace evoqtl {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kStreamSplit = 3;
constexpr std::uint64_t kStreamPfi = 4;
constexpr std::uint64_t kStreamReplicate = 6;
constexpr int kManifestVersion = 1;
constexpr int kOutputFormatVersion = 1;

double parse_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0')
        throw ConfigError("config key '" + key + "': bad number '" + value + "'");
    return v;
}

long long parse_int(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const long long v = std::strtoll(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0')
        throw ConfigError("config key '" + key + "': bad integer '" + value + "'");
    return v;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

// "lo:hi:step" grid syntax used by ld_r2_grid / d_max_grid. The built-in
// grids are compile-time constants; a config mismatch is rejected rather than
// silently reinterpreted.
void check_grid_spec(const std::string& key, const std::string& value,
                     std::span<const double> grid) {
    const auto parts = csv::split_line(value, ':');
    if (parts.size() != 3)
        throw ConfigError("config key '" + key + "': expected lo:hi:step");
    const double lo = parse_double(key, trim(parts[0]));
    const double hi = parse_double(key, trim(parts[1]));
    const double step = parse_double(key, trim(parts[2]));
    const bool matches = std::fabs(lo - grid.front()) < 1e-9 &&
                         std::fabs(hi - grid.back()) < 1e-9 &&
                         std::fabs(step - (grid[1] - grid[0])) < 1e-9;
    if (!matches)
        throw ConfigError("config key '" + key + "': grid '" + value +
                          "' does not match the built-in grid");
}

}  // namespace

std::string_view mode_name(Mode mode) {
    switch (mode) {
        case Mode::Starbase: return "starbase";
        case Mode::BasicGp: return "basic-gp";
        case Mode::Random: return "random";
    }
    return "?";
}

std::optional<Mode> mode_from_name(std::string_view name) {
    if (name == "starbase") return Mode::Starbase;
    if (name == "basic-gp") return Mode::BasicGp;
    if (name == "random") return Mode::Random;
    return std::nullopt;
}

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "mode") {
        const auto mode = mode_from_name(value);
        if (!mode) throw ConfigError("unknown mode '" + value + "'");
        cfg.mode = *mode;
    } else if (key == "population_size") {
        cfg.evo.population_size = static_cast<int>(parse_int(key, value));
    } else if (key == "generations") {
        cfg.evo.generations = static_cast<int>(parse_int(key, value));
    } else if (key == "min_snps") {
        cfg.evo.min_snps = static_cast<int>(parse_int(key, value));
    } else if (key == "max_snps") {
        cfg.evo.max_snps = static_cast<int>(parse_int(key, value));
    } else if (key == "bin_size") {
        cfg.evo.bin_size = static_cast<int>(parse_int(key, value));
    } else if (key == "crossover") {
        cfg.evo.p_crossover = parse_double(key, value);
    } else if (key == "mutation") {
        cfg.evo.p_mutation = parse_double(key, value);
    } else if (key == "smart") {
        cfg.evo.p_smart = parse_double(key, value);
    } else if (key == "random") {
        cfg.evo.p_random = parse_double(key, value);
    } else if (key == "tuning") {
        cfg.evo.p_node_tuning = parse_double(key, value);
    } else if (key == "within_bin") {
        cfg.evo.p_locality[0] = parse_double(key, value);
    } else if (key == "within_chromosome") {
        cfg.evo.p_locality[1] = parse_double(key, value);
    } else if (key == "outside_chromosome") {
        cfg.evo.p_locality[2] = parse_double(key, value);
    } else if (key == "alpha") {
        cfg.evo.ld_alpha = parse_double(key, value);
    } else if (key == "ld_r2_grid") {
        check_grid_spec(key, value, kLdR2Grid);
    } else if (key == "d_max_grid") {
        check_grid_spec(key, value, kLdDmaxGrid);
    } else if (key == "seed") {
        cfg.evo.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "workers") {
        cfg.evo.workers = static_cast<int>(parse_int(key, value));
    } else if (key == "qc_max_missing") {
        cfg.qc_max_missing = parse_double(key, value);
    } else if (key == "qc_min_maf") {
        cfg.qc_min_maf = parse_double(key, value);
    } else if (key == "split_fraction") {
        cfg.split_fraction = parse_double(key, value);
    } else if (key == "budget") {
        cfg.budget = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "qtl_window_bp") {
        cfg.qtl_window_bp = parse_int(key, value);
    } else if (key == "pfi_permutations") {
        cfg.pfi_permutations = static_cast<int>(parse_int(key, value));
    } else if (key == "dataset") {
        cfg.dataset_path = value;
    } else if (key == "targets") {
        cfg.targets_path = value;
    } else if (key == "out") {
        cfg.output_dir = value;
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

std::vector<QtlTarget> load_targets(const std::string& path, std::int64_t window_bp) {
    const auto table = csv::read_table(path);
    int snp_col = table.column("snp");
    if (snp_col < 0) snp_col = 0;
    std::vector<QtlTarget> targets;
    targets.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        QtlTarget target;
        target.snp = parse_snp_label(row[static_cast<std::size_t>(snp_col)]);
        target.window_bp = window_bp;
        targets.push_back(target);
    }
    if (targets.empty()) throw ConfigError("targets file has no rows: " + path);
    return targets;
}

namespace {

void write_ledger(const LedgerSnapshot& ledger, const std::string& path) {
    csv::Writer out(path);
    out.row({"counter", "value"});
    auto row = [&](const char* name, std::uint64_t value) {
        out.row({name, csv::format_int(static_cast<long long>(value))});
    };
    row("evaluations", ledger.ops.evaluations);
    row("failed_evaluations", ledger.ops.failed_evaluations);
    row("construction_failures", ledger.ops.construction_failures);
    row("crossover_ops", ledger.ops.crossover_ops);
    row("mutation_ops", ledger.ops.mutation_ops);
    row("node_tuning_ops", ledger.ops.node_tuning_ops);
    row("locality_within_bin", ledger.ops.locality_draws[0]);
    row("locality_within_chromosome", ledger.ops.locality_draws[1]);
    row("locality_outside_chromosome", ledger.ops.locality_draws[2]);
    row("ld_groups_processed", ledger.ops.ld_groups_processed);
    row("smart_recommendations", ledger.db.smart_recommendations);
    row("random_recommendations", ledger.db.random_recommendations);
    row("global_fallback_recommendations", ledger.db.global_fallbacks);
    row("pruned_flag_writes", ledger.db.pruned_flag_writes);
    row("uninformative_flag_writes", ledger.db.uninformative_flag_writes);
}

void write_history(std::span<const GenerationStats> history, const std::string& path) {
    csv::Writer out(path);
    out.row({"generation", "evaluations", "front0_size", "best_r2", "best_complexity"});
    for (const auto& stats : history) {
        out.row({csv::format_int(stats.generation),
                 csv::format_int(static_cast<long long>(stats.evaluations)),
                 csv::format_int(stats.front0_size), csv::format_double(stats.best_r2),
                 csv::format_int(stats.best_complexity)});
    }
}

void write_manifest(const RunConfig& cfg, std::size_t n_samples, std::size_t n_snps,
                    double wall_clock_seconds, const std::string& path) {
    std::ofstream out(path);
    out << "manifest_version: " << kManifestVersion << '\n';
    out << "output_format_version: " << kOutputFormatVersion << '\n';
    out << "mode: " << mode_name(cfg.mode) << '\n';
    out << "seed: " << cfg.evo.seed << '\n';
    out << "dataset: " << cfg.dataset_path << '\n';
    out << "samples: " << n_samples << '\n';
    out << "snps_after_qc: " << n_snps << '\n';
    out << "config:\n";
    out << "  population_size: " << cfg.evo.population_size << '\n';
    out << "  generations: " << cfg.evo.generations << '\n';
    out << "  min_snps: " << cfg.evo.min_snps << '\n';
    out << "  max_snps: " << cfg.evo.max_snps << '\n';
    out << "  bin_size: " << cfg.evo.bin_size << '\n';
    out << "  crossover: " << cfg.evo.p_crossover << '\n';
    out << "  mutation: " << cfg.evo.p_mutation << '\n';
    out << "  within_bin: " << cfg.evo.p_locality[0] << '\n';
    out << "  within_chromosome: " << cfg.evo.p_locality[1] << '\n';
    out << "  outside_chromosome: " << cfg.evo.p_locality[2] << '\n';
    out << "  smart: " << cfg.evo.p_smart << '\n';
    out << "  random: " << cfg.evo.p_random << '\n';
    out << "  tuning: " << cfg.evo.p_node_tuning << '\n';
    out << "  qc_max_missing: " << cfg.qc_max_missing << '\n';
    out << "  qc_min_maf: " << cfg.qc_min_maf << '\n';
    out << "  split_fraction: " << cfg.split_fraction << '\n';
    out << "  budget: " << cfg.derived_budget() << '\n';
    out << "  qtl_window_bp: " << cfg.qtl_window_bp << '\n';
    out << "  pfi_permutations: " << cfg.pfi_permutations << '\n';
    out << "  workers: " << cfg.evo.workers << '\n';
    out << "wall_clock_seconds: " << wall_clock_seconds << '\n';
}

// Rebuilds the exact model a front pipeline trained during evaluation: the
// survivor columns and the regressor seed stream pin it down without
// re-running the LD and selection nodes against since-updated flags.
void materialize_model(const Pipeline& pipeline, const std::vector<int>& survivors,
                       const DataSplit& split, const SnpDb& db, FittedModel& model,
                       Eigen::MatrixXd& validate_X, Eigen::VectorXd& validate_y) {
    const auto n_train = static_cast<Eigen::Index>(split.train.n_samples());
    const auto n_validate = static_cast<Eigen::Index>(split.validate.n_samples());
    Eigen::MatrixXd train_X(n_train, static_cast<Eigen::Index>(survivors.size()));
    validate_X.resize(n_validate, static_cast<Eigen::Index>(survivors.size()));
    for (std::size_t j = 0; j < survivors.size(); ++j) {
        const CodeTriple codes = db.record(survivors[j]).evaluation->codes();
        encode_column(
            split.train.genotypes.col(survivors[j]), codes,
            {train_X.col(static_cast<Eigen::Index>(j)).data(), static_cast<std::size_t>(n_train)});
        encode_column(split.validate.genotypes.col(survivors[j]), codes,
                      {validate_X.col(static_cast<Eigen::Index>(j)).data(),
                       static_cast<std::size_t>(n_validate)});
    }
    Eigen::VectorXd train_y(n_train);
    for (Eigen::Index i = 0; i < n_train; ++i) train_y[i] = split.train.phenotype[i];
    validate_y.resize(n_validate);
    for (Eigen::Index i = 0; i < n_validate; ++i) validate_y[i] = split.validate.phenotype[i];

    Rng regressor_rng(derive_seed(pipeline.seed, 2));
    model = fit_regressor(pipeline.regressor, train_X, train_y, regressor_rng);
}

struct ReplicateStats {
    double coverage = 0.0;
    double runtime = 0.0;
    double hypervolume = 0.0;
    double front_size = 0.0;
    double diversity = 0.0;
    std::optional<double> qtl_accuracy;
    std::optional<double> qtl_precision;
};

void write_aggregate(std::span<const ReplicateStats> stats, const std::string& path) {
    csv::Writer out(path);
    out.row({"metric", "mean", "stderr", "n"});
    auto emit = [&](const char* name, const std::vector<double>& values) {
        if (values.empty()) return;
        const double mean =
            std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
        double se = 0.0;
        if (values.size() > 1) {
            double ss = 0.0;
            for (double v : values) ss += (v - mean) * (v - mean);
            se = std::sqrt(ss / static_cast<double>(values.size() - 1)) /
                 std::sqrt(static_cast<double>(values.size()));
        }
        out.row({name, csv::format_double(mean), csv::format_double(se),
                 csv::format_int(static_cast<long long>(values.size()))});
    };
    auto collect = [&](auto getter) {
        std::vector<double> values;
        for (const auto& s : stats) {
            const auto v = getter(s);
            if (v.has_value()) values.push_back(*v);
        }
        return values;
    };
    using Opt = std::optional<double>;
    emit("coverage", collect([](const ReplicateStats& s) { return Opt(s.coverage); }));
    emit("runtime_seconds", collect([](const ReplicateStats& s) { return Opt(s.runtime); }));
    emit("hypervolume", collect([](const ReplicateStats& s) { return Opt(s.hypervolume); }));
    emit("front_size", collect([](const ReplicateStats& s) { return Opt(s.front_size); }));
    emit("diversity", collect([](const ReplicateStats& s) { return Opt(s.diversity); }));
    emit("qtl_accuracy", collect([](const ReplicateStats& s) { return s.qtl_accuracy; }));
    emit("qtl_precision_bp", collect([](const ReplicateStats& s) { return s.qtl_precision; }));
}

void write_cross_consistency(std::span<const ReplicateConsistency> replicates,
                             const std::string& path) {
    csv::Writer out(path);
    out.row({"replicate", "snp", "chromosome", "position", "mean_rank", "appearance", "score",
             "modal_encoder"});
    for (const auto& replicate : replicates) {
        for (const auto& entry : replicate.entries) {
            out.row({csv::format_int(replicate.replicate), to_string(entry.snp),
                     csv::format_int(entry.snp.chromosome), csv::format_int(entry.snp.position),
                     csv::format_double(entry.mean_rank),
                     csv::format_double(entry.appearance_proportion),
                     csv::format_double(entry.score),
                     std::string(model_name(entry.modal_encoding))});
        }
    }
}

void write_peaks(std::span<const Peak> peaks, const std::string& path) {
    csv::Writer out(path);
    out.row({"snp", "chromosome", "position", "mean_score", "replicates", "modal_encoder"});
    for (const auto& peak : peaks) {
        out.row({to_string(peak.representative), csv::format_int(peak.representative.chromosome),
                 csv::format_int(peak.representative.position), csv::format_double(peak.mean_score),
                 csv::format_int(peak.replicate_count),
                 std::string(model_name(peak.modal_encoding))});
    }
}

ReplicateStats stats_from_summary(const RunSummary& summary, bool has_targets) {
    ReplicateStats stats;
    stats.coverage = summary.metrics.coverage;
    stats.runtime = summary.metrics.runtime_seconds;
    stats.hypervolume = summary.metrics.hypervolume;
    stats.front_size = summary.metrics.front_size;
    stats.diversity = summary.metrics.diversity;
    if (has_targets) {
        stats.qtl_accuracy = summary.qtl_accuracy;
        stats.qtl_precision = summary.qtl_mean_precision;
    }
    return stats;
}

}  // namespace

RunSummary run(const RunConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    if (cfg.dataset_path.empty()) throw ConfigError("no dataset path configured");
    if (cfg.output_dir.empty()) throw ConfigError("no output directory configured");
    cfg.evo.validate();

    std::vector<QtlTarget> targets;
    if (!cfg.targets_path.empty()) targets = load_targets(cfg.targets_path, cfg.qtl_window_bp);

    SnpDataset raw;
    try {
        raw = load_dataset(cfg.dataset_path);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("dataset: ") + e.what());
    }

    fs::create_directories(cfg.output_dir);
    const auto out_path = [&](const char* name) {
        return (fs::path(cfg.output_dir) / name).string();
    };

    QcReport qc;
    SnpDataset filtered;
    DataSplit split;
    try {
        filtered = qc_filter(raw, cfg.qc_max_missing, cfg.qc_min_maf, &qc);
        raw = SnpDataset{};  // release
        split = split_dataset(filtered, cfg.split_fraction,
                              derive_seed(cfg.evo.seed, kStreamSplit));
        // mode imputation stays split-local so validate rows never leak into
        // the train-side modes
        split.train = impute_mode(split.train);
        split.validate = impute_mode(split.validate);
    } catch (const std::exception& e) {
        throw RunAbort(std::string("data preparation: ") + e.what());
    }
    write_qc_report(qc, out_path("qc_report.csv"));

    EvolutionConfig evo = cfg.evo;
    evo.use_ld_node = cfg.mode != Mode::BasicGp;
    evo.smart_enabled = cfg.mode == Mode::Starbase;
    SnpDb db(filtered.labels, assign_bins(filtered, evo.bin_size),
             /*flag_updates=*/cfg.mode != Mode::BasicGp);

    std::vector<Evaluated> population;
    std::vector<GenerationStats> history;
    OpLedger ops;
    try {
        if (cfg.mode == Mode::Random) {
            const std::uint64_t budget = cfg.derived_budget();
            Rng rng(derive_seed(evo.seed, 1));
            std::vector<Pipeline> pipelines;
            pipelines.reserve(budget);
            for (std::uint64_t i = 0; i < budget; ++i) {
                Pipeline p = random_pipeline(db, evo.max_snps, rng);
                p.ld.alpha = evo.ld_alpha;
                p.seed = derive_seed(derive_seed(evo.seed, 2, 0), 0, i);
                pipelines.push_back(std::move(p));
            }
            process_snps(pipelines, split, db, evo.workers);
            auto results = evaluate_all(pipelines, split, db, {evo.use_ld_node}, evo.workers);
            ops.evaluations = budget;
            for (std::size_t i = 0; i < pipelines.size(); ++i) {
                ops.ld_groups_processed +=
                    static_cast<std::uint64_t>(results[i].ld_groups_processed);
                db.mark_pruned(results[i].pruned);
                if (results[i].failed) {
                    ++ops.failed_evaluations;
                } else {
                    population.push_back({std::move(pipelines[i]), std::move(results[i])});
                }
            }
            if (population.empty()) throw RunAbort("random mode: every pipeline failed");
            GenerationStats stats;
            stats.generation = 0;
            stats.evaluations = ops.evaluations;
            stats.front0_size = static_cast<int>(extract_front(population).size());
            double best = -1.0;
            int best_c = 0;
            for (const auto& member : population) {
                if (member.eval.r2 > best) {
                    best = member.eval.r2;
                    best_c = member.eval.complexity;
                } else if (member.eval.r2 == best) {
                    best_c = std::min(best_c, member.eval.complexity);
                }
            }
            stats.best_r2 = best;
            stats.best_complexity = best_c;
            history.push_back(stats);
        } else {
            EvolveResult evolved = evolve(evo, split, db);
            population = std::move(evolved.population);
            history = std::move(evolved.history);
            ops = evolved.ledger;
        }
    } catch (const RunAbort&) {
        throw;
    } catch (const std::exception& e) {
        throw RunAbort(e.what());
    }
    write_history(history, out_path("history.csv"));

    // Analysis: Pareto front, PFI, consistency, metrics, QTL report.
    const auto front = extract_front(std::move(population));
    write_pareto_front(front, db, out_path("pareto_front.csv"));

    std::vector<PipelineImportances> per_pipeline(front.size());
    parallel_for(front.size(), evo.workers, [&](std::size_t i) {
        FittedModel model;
        Eigen::MatrixXd validate_X;
        Eigen::VectorXd validate_y;
        materialize_model(front[i].pipeline, front[i].eval.survivors, split, db, model, validate_X,
                          validate_y);
        Rng rng(derive_seed(evo.seed, kStreamPfi, i));
        const auto importances =
            permutation_importance(model, validate_X, validate_y, cfg.pfi_permutations, rng);
        auto& scored = per_pipeline[i];
        for (std::size_t j = 0; j < front[i].eval.survivors.size(); ++j) {
            const int col = front[i].eval.survivors[j];
            if (!db.record(col).considered) continue;  // flag dropped after evaluation
            scored.cols.push_back(col);
            scored.pfi.push_back(importances[j]);
        }
    });

    RunSummary summary;
    summary.consistency = consistency_scores(per_pipeline, db);
    write_consistency(summary.consistency, out_path("consistency.csv"));

    std::vector<std::pair<double, int>> objectives;
    objectives.reserve(front.size());
    for (const auto& member : front) objectives.emplace_back(member.eval.r2, member.eval.complexity);

    summary.metrics.hypervolume = hypervolume(objectives);
    summary.metrics.front_size = static_cast<int>(front.size());
    summary.metrics.diversity = snp_diversity(front, db);
    summary.metrics.coverage = db.coverage();
    summary.front_size = summary.metrics.front_size;

    if (!targets.empty()) {
        const auto labels = front_snp_labels(front, db);
        summary.qtl_hits = qtl_report(labels, targets);
        write_qtl_report(summary.qtl_hits, out_path("qtl_report.csv"));
        int hits = 0;
        double distance_sum = 0.0;
        int distance_count = 0;
        for (const auto& hit : summary.qtl_hits) {
            if (hit.hit) ++hits;
            if (hit.precision_bp.has_value()) {
                distance_sum += static_cast<double>(*hit.precision_bp);
                ++distance_count;
            }
        }
        summary.qtl_accuracy = static_cast<double>(hits) / static_cast<double>(targets.size());
        if (distance_count > 0)
            summary.qtl_mean_precision = distance_sum / static_cast<double>(distance_count);
    }

    db.dump(out_path("snp_db.csv"));
    summary.ledger.ops = ops;
    summary.ledger.db = db.counters();
    write_ledger(summary.ledger, out_path("ledger.csv"));

    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
    summary.metrics.runtime_seconds = elapsed.count();
    write_metrics(summary.metrics, out_path("metrics.csv"));
    write_manifest(cfg, filtered.n_samples(), filtered.n_snps(), elapsed.count(),
                   out_path("manifest.txt"));
    return summary;
}

SweepSummary replicate_sweep(const RunConfig& cfg, int n_replicates, bool identical_seeds) {
    if (n_replicates < 1) throw ConfigError("sweep needs at least one replicate");
    if (cfg.output_dir.empty()) throw ConfigError("no output directory configured");
    fs::create_directories(cfg.output_dir);

    SweepSummary sweep;
    std::vector<ReplicateConsistency> consistency;
    std::vector<ReplicateStats> stats;
    const bool has_targets = !cfg.targets_path.empty();

    for (int i = 0; i < n_replicates; ++i) {
        RunConfig replicate_cfg = cfg;
        replicate_cfg.evo.seed =
            identical_seeds ? cfg.evo.seed : derive_seed(cfg.evo.seed, kStreamReplicate,
                                                         static_cast<std::uint64_t>(i));
        replicate_cfg.output_dir =
            (fs::path(cfg.output_dir) / ("replicate_" + std::to_string(i))).string();
        try {
            RunSummary summary = run(replicate_cfg);
            consistency.push_back({i, summary.consistency});
            stats.push_back(stats_from_summary(summary, has_targets));
            sweep.replicates.push_back(std::move(summary));
        } catch (const std::exception& e) {
            sweep.failures.push_back("replicate_" + std::to_string(i) + ": " + e.what());
        }
    }

    const auto out_path = [&](const char* name) {
        return (fs::path(cfg.output_dir) / name).string();
    };
    write_cross_consistency(consistency, out_path("cross_consistency.csv"));
    sweep.peaks = top_peaks(consistency, 50, cfg.qtl_window_bp);
    write_peaks(sweep.peaks, out_path("peaks.csv"));
    write_aggregate(stats, out_path("aggregate.csv"));

    if (!sweep.failures.empty()) {
        std::string message = "replicate failures:";
        for (const auto& failure : sweep.failures) message += "\n  " + failure;
        throw RunAbort(message);
    }
    return sweep;
}

SweepSummary aggregate_from_directories(const std::vector<std::string>& replicate_dirs,
                                        const std::string& output_dir) {
    if (replicate_dirs.empty()) throw ConfigError("no replicate directories given");
    fs::create_directories(output_dir);

    std::vector<ReplicateConsistency> consistency;
    std::vector<ReplicateStats> stats;
    int replicate_id = 0;
    for (const auto& dir : replicate_dirs) {
        const auto metrics = csv::read_table((fs::path(dir) / "metrics.csv").string());
        if (metrics.rows.empty()) throw RunAbort("empty metrics.csv in " + dir);
        ReplicateStats s;
        const auto& row = metrics.rows.front();
        auto field = [&](const char* name) {
            const int idx = metrics.column(name);
            if (idx < 0) throw RunAbort(std::string("metrics.csv missing column ") + name);
            return std::stod(row[static_cast<std::size_t>(idx)]);
        };
        s.hypervolume = field("hypervolume");
        s.front_size = field("front_size");
        s.diversity = field("diversity");
        s.coverage = field("coverage");
        s.runtime = field("runtime_seconds");

        const auto qtl_path = fs::path(dir) / "qtl_report.csv";
        if (fs::exists(qtl_path)) {
            const auto report = csv::read_table(qtl_path.string());
            const int hit_col = report.column("hit");
            const int precision_col = report.column("precision_bp");
            int hits = 0;
            double distance_sum = 0.0;
            int distance_count = 0;
            for (const auto& qtl_row : report.rows) {
                if (qtl_row[static_cast<std::size_t>(hit_col)] == "1") ++hits;
                const auto& precision = qtl_row[static_cast<std::size_t>(precision_col)];
                if (!precision.empty()) {
                    distance_sum += std::stod(precision);
                    ++distance_count;
                }
            }
            if (!report.rows.empty()) {
                s.qtl_accuracy =
                    static_cast<double>(hits) / static_cast<double>(report.rows.size());
                if (distance_count > 0)
                    s.qtl_precision = distance_sum / static_cast<double>(distance_count);
            }
        }
        stats.push_back(s);

        const auto table = csv::read_table((fs::path(dir) / "consistency.csv").string());
        ReplicateConsistency rc;
        rc.replicate = replicate_id++;
        for (const auto& entry_row : table.rows) {
            ConsistencyEntry entry;
            entry.snp = parse_snp_label(entry_row[0]);
            entry.mean_rank = std::stod(entry_row[3]);
            entry.appearance_proportion = std::stod(entry_row[4]);
            entry.score = std::stod(entry_row[5]);
            const auto model = model_from_name(entry_row[6]);
            entry.modal_encoding = model.value_or(InheritanceModel::Additive);
            rc.entries.push_back(entry);
        }
        consistency.push_back(std::move(rc));
    }

    SweepSummary sweep;
    const auto out_path = [&](const char* name) {
        return (fs::path(output_dir) / name).string();
    };
    write_cross_consistency(consistency, out_path("cross_consistency.csv"));
    sweep.peaks = top_peaks(consistency, 50);
    write_peaks(sweep.peaks, out_path("peaks.csv"));
    write_aggregate(stats, out_path("aggregate.csv"));
    return sweep;
}

}  // namespace evoqtl
