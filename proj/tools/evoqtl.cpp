// evoqtl CLI: evolutionary search for phenotype-associated SNPs.
//
// Subcommands:
//   synth   generate a synthetic cohort plus ground-truth manifest
//   run     one replicate in a chosen mode (starbase | basic-gp | random)
//   sweep   n replicates with derived seeds plus aggregate reports
//   report  rebuild sweep aggregates from existing replicate directories
//
// Exit codes: 0 success, 2 configuration error, 3 run abort.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "evoqtl/csv.hpp"
#include "evoqtl/harness.hpp"

namespace fs = std::filesystem;
using namespace evoqtl;

namespace {

struct CliOptions {
    std::string config_path;
    std::string mode;
    std::string dataset;
    std::string targets;
    std::string out;
    std::int64_t seed = -1;
    int workers = 0;
};

void add_run_options(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--config", opt.config_path, "key = value configuration file");
    cmd->add_option("--mode", opt.mode, "starbase | basic-gp | random");
    cmd->add_option("--data", opt.dataset, "dataset file (phenotype + chr.position columns)");
    cmd->add_option("--targets", opt.targets, "known QTL targets file (snp column)");
    cmd->add_option("--out", opt.out, "output directory")->required();
    cmd->add_option("--seed", opt.seed, "run seed");
    cmd->add_option("--workers", opt.workers, "evaluation worker threads (0 = hardware)");
}

RunConfig build_config(const CliOptions& opt) {
    RunConfig cfg;
    cfg.evo.workers = static_cast<int>(std::thread::hardware_concurrency());
    if (cfg.evo.workers < 1) cfg.evo.workers = 1;
    if (!opt.config_path.empty()) apply_config_file(cfg, opt.config_path);
    // CLI flags override file values
    if (!opt.mode.empty()) apply_config_entry(cfg, "mode", opt.mode);
    if (!opt.dataset.empty()) cfg.dataset_path = opt.dataset;
    if (!opt.targets.empty()) cfg.targets_path = opt.targets;
    if (!opt.out.empty()) cfg.output_dir = opt.out;
    if (opt.seed >= 0) cfg.evo.seed = static_cast<std::uint64_t>(opt.seed);
    if (opt.workers > 0) cfg.evo.workers = opt.workers;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"evolutionary multi-objective search for phenotype-associated SNPs"};
    app.require_subcommand(1);

    CliOptions opt;

    // --- synth ---
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic cohort");
    SynthSpec synth_spec;
    std::string synth_out;
    std::vector<std::string> qtl_specs;
    std::int64_t synth_seed = 0;
    synth_cmd->add_option("--out", synth_out, "output directory")->required();
    synth_cmd->add_option("--samples", synth_spec.n_samples, "sample count");
    synth_cmd->add_option("--snps", synth_spec.n_snps, "SNP count");
    synth_cmd->add_option("--chromosomes", synth_spec.chromosomes, "chromosome count");
    synth_cmd->add_option("--maf-min", synth_spec.maf_min, "minimum allele frequency");
    synth_cmd->add_option("--maf-max", synth_spec.maf_max, "maximum allele frequency");
    synth_cmd->add_option("--block-size", synth_spec.block_size, "SNPs per LD block");
    synth_cmd->add_option("--block-corr", synth_spec.block_corr, "within-block correlation");
    synth_cmd->add_option("--noise", synth_spec.noise_variance, "phenotype noise variance");
    synth_cmd->add_option("--seed", synth_seed, "generator seed");
    synth_cmd->add_option("--qtl", qtl_specs,
                          "planted QTL as chr.pos:model:effect or chr.pos:model:r2=<v>");

    // --- run ---
    auto* run_cmd = app.add_subcommand("run", "run one replicate");
    add_run_options(run_cmd, opt);

    // --- sweep ---
    auto* sweep_cmd = app.add_subcommand("sweep", "run replicates and aggregate");
    add_run_options(sweep_cmd, opt);
    int replicates = 1;
    bool identical_seeds = false;
    sweep_cmd->add_option("--replicates", replicates, "replicate count")->required();
    sweep_cmd->add_flag("--identical-seeds", identical_seeds,
                        "give every replicate the same seed");

    // --- report ---
    auto* report_cmd = app.add_subcommand("report", "aggregate existing replicate directories");
    std::string report_in, report_out;
    report_cmd->add_option("--in", report_in, "sweep directory holding replicate_* subdirs")
        ->required();
    report_cmd->add_option("--out", report_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth_cmd->parsed()) {
            for (const auto& text : qtl_specs) {
                const auto parts = csv::split_line(text, ':');
                if (parts.size() < 2) throw ConfigError("bad --qtl spec '" + text + "'");
                PlantedQtl qtl;
                qtl.snp = parse_snp_label(parts[0]);
                const auto model = model_from_name(parts[1]);
                if (!model) throw ConfigError("bad --qtl model in '" + text + "'");
                qtl.model = *model;
                if (parts.size() > 2) {
                    if (parts[2].rfind("r2=", 0) == 0) {
                        qtl.target_marginal_r2 = std::stod(parts[2].substr(3));
                        qtl.effect = 0.0;
                    } else {
                        qtl.effect = std::stod(parts[2]);
                    }
                }
                synth_spec.qtls.push_back(qtl);
            }
            synth_spec.seed = static_cast<std::uint64_t>(synth_seed);
            const SynthResult result = generate_synthetic(synth_spec);
            fs::create_directories(synth_out);
            save_dataset(result.dataset, (fs::path(synth_out) / "dataset.csv").string());
            write_truth_manifest(result, (fs::path(synth_out) / "truth.csv").string());
            std::printf("wrote %zu samples x %zu snps to %s\n", result.dataset.n_samples(),
                        result.dataset.n_snps(), synth_out.c_str());
        } else if (run_cmd->parsed()) {
            const RunConfig cfg = build_config(opt);
            const RunSummary summary = run(cfg);
            std::printf("mode=%s front=%d hypervolume=%.6f coverage=%.4f\n",
                        std::string(mode_name(cfg.mode)).c_str(), summary.front_size,
                        summary.metrics.hypervolume, summary.metrics.coverage);
        } else if (sweep_cmd->parsed()) {
            const RunConfig cfg = build_config(opt);
            const SweepSummary sweep = replicate_sweep(cfg, replicates, identical_seeds);
            std::printf("completed %zu replicates, %zu peaks\n", sweep.replicates.size(),
                        sweep.peaks.size());
        } else if (report_cmd->parsed()) {
            std::vector<std::string> dirs;
            for (int i = 0;; ++i) {
                const auto dir = fs::path(report_in) / ("replicate_" + std::to_string(i));
                if (!fs::exists(dir / "metrics.csv")) break;
                dirs.push_back(dir.string());
            }
            if (dirs.empty()) throw ConfigError("no replicate_* directories in " + report_in);
            const SweepSummary sweep = aggregate_from_directories(dirs, report_out);
            std::printf("aggregated %zu replicates, %zu peaks\n", dirs.size(),
                        sweep.peaks.size());
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "run aborted: %s\n", e.what());
        return 3;
    }
    return 0;
}
