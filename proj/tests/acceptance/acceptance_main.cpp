// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria 1, 6 and 7 share a desk-scale synthetic cohort (1,000
// samples x 2,000 SNPs, four planted QTLs spanning four inheritance models).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "evoqtl/analysis.hpp"
#include "evoqtl/csv.hpp"
#include "evoqtl/harness.hpp"
#include "evoqtl/stats.hpp"
#include "support/oracles.hpp"

using namespace evoqtl;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    int id;
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<Criterion> g_results;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    g_results.push_back({id, name, pass, detail});
    std::printf("[%s] criterion %d: %s  (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
}

fs::path work_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "evoqtl_acceptance";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---- shared desk-scale cohort (criteria 1, 6, 7) ----

struct DeskCohort {
    fs::path dataset;
    fs::path truth;
    std::vector<SynthTruth> planted;
};

DeskCohort make_desk_cohort() {
    SynthSpec spec;
    spec.n_samples = 1000;
    spec.n_snps = 2000;
    spec.chromosomes = 10;
    spec.maf_min = 0.15;
    spec.maf_max = 0.5;
    spec.block_size = 8;
    spec.block_corr = 0.55;
    spec.gap_min_bp = 120'000;  // ~10 SNPs per +-1 Mb window
    spec.gap_max_bp = 280'000;
    spec.noise_variance = 1.0;
    spec.seed = 20240809;
    spec.qtls = {
        {{1, 12'000'000}, InheritanceModel::Additive, 0.0, 0.05},
        {{3, 20'000'000}, InheritanceModel::Dominant, 0.0, 0.045},
        {{6, 8'000'000}, InheritanceModel::Recessive, 0.0, 0.055},
        {{9, 16'000'000}, InheritanceModel::Superadditive, 0.0, 0.04},
    };
    const auto result = generate_synthetic(spec);

    DeskCohort cohort;
    const auto dir = work_dir() / "cohort";
    fs::create_directories(dir);
    cohort.dataset = dir / "dataset.csv";
    cohort.truth = dir / "truth.csv";
    save_dataset(result.dataset, cohort.dataset.string());
    write_truth_manifest(result, cohort.truth.string());
    cohort.planted = result.truth;
    return cohort;
}

RunConfig desk_config(const DeskCohort& cohort, const fs::path& out) {
    RunConfig cfg;
    cfg.dataset_path = cohort.dataset.string();
    cfg.targets_path = cohort.truth.string();
    cfg.output_dir = out.string();
    cfg.evo.population_size = 50;
    cfg.evo.generations = 20;
    // 1,000 samples split 50/50 -> 500 x 0.10 = 50 SNPs per pipeline by the
    // same tenfold-samples rule that yields 150 at the full cohort size
    cfg.evo.min_snps = 20;
    cfg.evo.max_snps = 50;
    cfg.evo.bin_size = 100;
    cfg.evo.seed = 4242;
    cfg.evo.workers = 1;
    return cfg;
}

// ---- criterion 1: budget reproduction + desk runtime ----

void criterion_budget(double desk_replicate_seconds, std::uint64_t desk_evaluations) {
    // Table I configuration on a compact cohort: the ledger must total
    // 150 + 100 * 2 * 150 = 30,150 evaluations exactly.
    SynthSpec spec;
    spec.n_samples = 400;
    spec.n_snps = 250;
    spec.chromosomes = 5;
    spec.block_size = 6;
    spec.block_corr = 0.5;
    spec.noise_variance = 1.0;
    spec.seed = 99;
    spec.qtls = {{{1, 1'000'000}, InheritanceModel::Additive, 0.0, 0.12},
                 {{4, 2'000'000}, InheritanceModel::Dominant, 0.0, 0.09}};
    const auto synth = generate_synthetic(spec);
    const auto dir = work_dir() / "budget";
    fs::create_directories(dir);
    save_dataset(synth.dataset, (dir / "dataset.csv").string());

    RunConfig cfg;
    cfg.dataset_path = (dir / "dataset.csv").string();
    cfg.output_dir = (dir / "out").string();
    cfg.evo.population_size = 150;
    cfg.evo.generations = 100;
    cfg.evo.min_snps = 50;
    cfg.evo.max_snps = 150;
    cfg.evo.bin_size = 500;
    cfg.evo.seed = 7;
    cfg.evo.workers = 1;

    const auto summary = run(cfg);
    const bool ledger_exact = summary.ledger.ops.evaluations == 30'150u;
    const bool desk_ledger = desk_evaluations == 50u + 20u * 2u * 50u;
    const bool runtime_ok = desk_replicate_seconds < 180.0;

    std::ostringstream detail;
    detail << "table-I ledger=" << summary.ledger.ops.evaluations << " (want 30150), desk ledger="
           << desk_evaluations << " (want 2050), desk replicate=" << std::fixed
           << std::setprecision(1) << desk_replicate_seconds << "s (< 180s)";
    report(1, "budget reproduction and desk runtime", ledger_exact && desk_ledger && runtime_ok,
           detail.str());
}

// ---- criterion 2: NSGA-II vs brute force ----

void criterion_nsga() {
    Rng rng(1234);
    int mismatches = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_below(29));
        std::vector<oracles::Point> points;
        std::vector<Evaluated> population;
        for (int i = 0; i < n; ++i) {
            oracles::Point p{rng.uniform(), 1 + static_cast<int>(rng.next_below(40))};
            // duplicated objective pairs exercise the tie handling
            if (i > 0 && rng.bernoulli(0.2)) p = points[rng.next_below(points.size())];
            points.push_back(p);
            Evaluated e;
            e.eval.failed = false;
            e.eval.r2 = p.r2;
            e.eval.complexity = p.complexity;
            population.push_back(e);
        }

        const auto fronts = nondominated_sort(population);
        const auto expected_fronts = oracles::brute_fronts(points);
        if (fronts.size() != expected_fronts.size()) {
            ++mismatches;
            continue;
        }
        bool front_match = true;
        for (std::size_t f = 0; f < fronts.size(); ++f) {
            auto a = fronts[f];
            auto b = expected_fronts[f];
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            if (a != b) front_match = false;
        }
        if (!front_match) {
            ++mismatches;
            continue;
        }

        for (const auto& front : fronts) {
            const auto ours = crowding_distance(population, front);
            const auto expected = oracles::brute_crowding(points, front);
            for (std::size_t k = 0; k < ours.size(); ++k) {
                const bool inf_match = std::isinf(ours[k]) == std::isinf(expected[k]);
                const bool value_match =
                    std::isinf(ours[k]) || std::fabs(ours[k] - expected[k]) < 1e-12;
                if (!inf_match || !value_match) ++mismatches;
            }
        }

        const int size = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
        const auto selected = survival_select(population, size);
        const auto expected_sel = oracles::brute_truncation(points, size);
        std::multiset<std::pair<double, int>> ours_set, expected_set;
        for (const auto& m : selected) ours_set.insert({m.eval.r2, m.eval.complexity});
        for (int idx : expected_sel) expected_set.insert({points[idx].r2, points[idx].complexity});
        if (static_cast<int>(selected.size()) > size || ours_set != expected_set) ++mismatches;
    }
    report(2, "NSGA-II sort/crowding/survival vs brute force", mismatches == 0,
           "mismatches=" + std::to_string(mismatches) + " over 200 random populations");
}

// ---- criterion 3: hypervolume ----

void criterion_hypervolume() {
    bool pass = true;
    std::ostringstream detail;

    const std::vector<std::pair<double, int>> front{{0.6, 1}, {0.8, 75}};
    const double hv = hypervolume(front);
    pass &= std::fabs(hv - 522.0 / 745.0) < 1e-12;
    detail << "front={(0.6,1),(0.8,75)} hv=" << std::setprecision(6) << hv;

    std::vector<std::pair<double, double>> transformed;
    for (const auto& [r2, k] : front) transformed.emplace_back(r2, complexity_to_objective(k));
    const auto mc = oracles::mc_hypervolume(transformed, 1'000'000, 777);
    pass &= std::fabs(hv - mc.value) < 3.0 * mc.sigma;
    detail << " mc=" << mc.value << "+-" << mc.sigma;

    const std::vector<std::pair<double, int>> solo{{0.4, 1}};
    const std::vector<std::pair<double, int>> degenerate{{0.4, 150}};
    pass &= std::fabs(hypervolume(solo) - 0.4) < 1e-12;
    pass &= std::fabs(hypervolume(degenerate)) < 1e-12;
    pass &= std::fabs(complexity_to_objective(1) - 1.0) < 1e-15;
    pass &= std::fabs(complexity_to_objective(150)) < 1e-15;

    Rng rng(31337);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<std::pair<double, int>> random_front;
        std::vector<std::pair<double, double>> random_transformed;
        for (int i = 0; i < 4; ++i) {
            const double r2 = 0.05 + 0.9 * rng.uniform();
            const int k = 1 + static_cast<int>(rng.next_below(150));
            random_front.emplace_back(r2, k);
            random_transformed.emplace_back(r2, complexity_to_objective(k));
        }
        const auto estimate = oracles::mc_hypervolume(random_transformed, 1'000'000, 900 + trial);
        pass &= std::fabs(hypervolume(random_front) - estimate.value) < 3.0 * estimate.sigma;
    }
    report(3, "hypervolume sweep vs Monte-Carlo and transform endpoints", pass, detail.str());
}

// ---- criterion 4: encoding selection ----

void criterion_encoding() {
    Rng rng(8888);
    const int trials = 1000;
    int noisy_recovered = 0, noiseless_recovered = 0;

    constexpr int kSamplesPerTrial = 2000;
    auto fill_column = [&](const CodeTriple& codes, double noise_sd, double p,
                           std::vector<std::int8_t>& g, std::vector<double>& y) {
        g.clear();
        y.clear();
        for (int i = 0; i < kSamplesPerTrial; ++i) {
            const int a = rng.bernoulli(p) ? 1 : 0;
            const int b = rng.bernoulli(p) ? 1 : 0;
            g.push_back(static_cast<std::int8_t>(a + b));
        }
        // guarantee every class appears so PAGER sees all three means
        g[0] = 0;
        g[1] = 1;
        g[2] = 2;
        for (std::size_t i = 0; i < g.size(); ++i)
            y.push_back(codes[static_cast<std::size_t>(g[i])] + noise_sd * rng.normal());
    };

    for (int t = 0; t < trials; ++t) {
        const auto model = static_cast<InheritanceModel>(t % kStrictModelCount);
        const CodeTriple codes = strict_codes(model);
        const double p = 0.3 + 0.15 * rng.uniform();
        std::vector<std::int8_t> gt, gv;
        std::vector<double> yt, yv;

        // noise sd giving marginal r2 ~= 0.1: var(signal) / (var + sd^2) = 0.1
        fill_column(codes, 0.0, p, gt, yt);
        const double signal_var = stats::variance(yt);
        const double noise_sd = std::sqrt(9.0 * signal_var);

        // recovery = the planted model itself, or a PAGER selection whose
        // learned codes sit closer to the planted triple than to any rival
        // strict triple: such an encoding is r2-equivalent to the truth
        auto recovers = [&](const EncodingResult& result) {
            if (result.model == model) return true;
            if (result.model != InheritanceModel::Pager) return false;
            int closest = -1;
            double closest_distance = std::numeric_limits<double>::infinity();
            for (int m = 0; m < kStrictModelCount; ++m) {
                const auto rival = strict_codes(static_cast<InheritanceModel>(m));
                double distance = 0.0;
                for (int c = 0; c < 3; ++c)
                    distance = std::max(distance,
                                        std::fabs(rival[static_cast<std::size_t>(c)] -
                                                  (*result.pager_codes)[static_cast<std::size_t>(c)]));
                if (distance < closest_distance) {
                    closest_distance = distance;
                    closest = m;
                }
            }
            return closest == static_cast<int>(model);
        };

        fill_column(codes, noise_sd, p, gt, yt);
        fill_column(codes, noise_sd, p, gv, yv);
        if (recovers(select_optimal_encoding(gt, yt, gv, yv))) ++noisy_recovered;

        fill_column(codes, 0.0, p, gt, yt);
        fill_column(codes, 0.0, p, gv, yv);
        if (select_optimal_encoding(gt, yt, gv, yv).model == model) ++noiseless_recovered;
    }

    // PAGER codes against the per-class-mean oracle to 1e-12
    bool pager_ok = true;
    for (int t = 0; t < 200; ++t) {
        std::vector<std::int8_t> g;
        std::vector<double> y;
        for (int i = 0; i < 60; ++i) {
            g.push_back(static_cast<std::int8_t>(i % 3));
            y.push_back(rng.normal() * 3.0 + 1.0);
        }
        const auto codes = compute_pager_codes(g, y);
        long double sum[3] = {0, 0, 0};
        int count[3] = {0, 0, 0};
        for (std::size_t i = 0; i < g.size(); ++i) {
            sum[g[i]] += y[i];
            ++count[g[i]];
        }
        long double mean[3];
        for (int c = 0; c < 3; ++c) mean[c] = sum[c] / count[c];
        const long double lo = std::min({mean[0], mean[1], mean[2]});
        const long double hi = std::max({mean[0], mean[1], mean[2]});
        for (int c = 0; c < 3; ++c) {
            const double expected = static_cast<double>((mean[c] - lo) / (hi - lo));
            if (std::fabs(codes[static_cast<std::size_t>(c)] - expected) > 1e-12) pager_ok = false;
        }
    }

    const double noisy_rate = static_cast<double>(noisy_recovered) / trials;
    const bool pass = noisy_rate >= 0.90 && noiseless_recovered == trials && pager_ok;
    std::ostringstream detail;
    detail << "noisy recovery=" << noisy_recovered << "/1000, noiseless=" << noiseless_recovered
           << "/1000, pager oracle " << (pager_ok ? "ok" : "mismatch");
    report(4, "planted-encoding recovery and PAGER oracle", pass, detail.str());
}

// ---- criterion 5: LD node ----

void criterion_ld() {
    Rng rng(5150);
    bool duplicates_ok = true, threshold_ok = true, bh_ok = true, wald_ok = true;

    // planted duplicates: always reduced to the higher-marginal member
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 80;
        SnpDataset ds;
        ds.phenotype.assign(static_cast<std::size_t>(n), 0.0);
        ds.labels = {{1, 1000}, {1, 2000}, {1, 3000}};
        ds.genotypes = GenotypeMatrix(static_cast<std::size_t>(n), 3);
        for (int i = 0; i < n; ++i) {
            const auto g = static_cast<std::int8_t>(rng.next_below(3));
            ds.genotypes.set(static_cast<std::size_t>(i), 0, g);
            ds.genotypes.set(static_cast<std::size_t>(i), 1, g);
            ds.genotypes.set(static_cast<std::size_t>(i), 2,
                             static_cast<std::int8_t>(rng.next_below(3)));
        }
        SnpDb db(ds.labels, assign_bins(ds, 4), true);
        const double r_low = 0.01 + 0.04 * rng.uniform();
        const double r_high = r_low + 0.01 + 0.05 * rng.uniform();
        EncodingResult weak, strong;
        weak.marginal_validation_r2 = r_low;
        strong.marginal_validation_r2 = r_high;
        const bool first_strong = rng.bernoulli(0.5);
        db.upsert_evaluation(0, first_strong ? strong : weak);
        db.upsert_evaluation(1, first_strong ? weak : strong);
        db.upsert_evaluation(2, weak);
        LdGroup group{1, {0, 1, 2}};
        const auto retained = prune_pairwise(group, ds.genotypes, db, 0.9);
        const int keep = first_strong ? 0 : 1;
        const int drop = first_strong ? 1 : 0;
        if (std::find(retained.begin(), retained.end(), keep) == retained.end())
            duplicates_ok = false;
        if (std::find(retained.begin(), retained.end(), drop) != retained.end())
            duplicates_ok = false;

        // no surviving pair may exceed the threshold (recompute)
        for (std::size_t a = 0; a < retained.size(); ++a) {
            for (std::size_t b = a + 1; b < retained.size(); ++b) {
                std::vector<double> xa(static_cast<std::size_t>(n)), xb(static_cast<std::size_t>(n));
                for (int i = 0; i < n; ++i) {
                    xa[static_cast<std::size_t>(i)] =
                        ds.genotypes.at(static_cast<std::size_t>(i), retained[a]);
                    xb[static_cast<std::size_t>(i)] =
                        ds.genotypes.at(static_cast<std::size_t>(i), retained[b]);
                }
                const double r = stats::pearson(xa, xb);
                if (r * r > 0.9) threshold_ok = false;
            }
        }
    }

    // BH-FDR on 100 random p vectors: exact match with the direct step-up
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 1 + static_cast<int>(rng.next_below(20));
        std::vector<double> p;
        for (int i = 0; i < m; ++i) p.push_back(rng.uniform());
        const auto ours = stats::bh_adjust(p);
        const auto expected = oracles::bh_adjust(p);
        for (int i = 0; i < m; ++i)
            if (std::fabs(ours[static_cast<std::size_t>(i)] -
                          expected[static_cast<std::size_t>(i)]) > 1e-13)
                bh_ok = false;
    }

    // Wald p vs the reference two-covariate oracle at 1e-9 via alpha probes
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 50;
        SnpDataset ds;
        ds.labels = {{1, 100}, {1, 200}};
        ds.genotypes = GenotypeMatrix(static_cast<std::size_t>(n), 2);
        ds.phenotype.resize(static_cast<std::size_t>(n));
        std::vector<double> x_candidate(static_cast<std::size_t>(n));
        std::vector<double> x_anchor(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const auto g0 = static_cast<std::int8_t>(rng.next_below(3));
            const auto g1 = static_cast<std::int8_t>(rng.next_below(3));
            ds.genotypes.set(static_cast<std::size_t>(i), 0, g0);
            ds.genotypes.set(static_cast<std::size_t>(i), 1, g1);
            ds.phenotype[static_cast<std::size_t>(i)] = 0.25 * g0 + 0.2 * g1 + rng.normal();
            x_candidate[static_cast<std::size_t>(i)] = g0 * 0.5;
            x_anchor[static_cast<std::size_t>(i)] = g1 * 0.5;
        }
        DataSplit split;
        split.train = ds;
        split.validate = ds;
        SnpDb db(ds.labels, assign_bins(ds, 4), true);
        EncodingResult weak, strong;
        weak.marginal_validation_r2 = 0.01;
        strong.marginal_validation_r2 = 0.02;
        db.upsert_evaluation(0, weak);
        db.upsert_evaluation(1, strong);

        const auto oracle =
            oracles::wald_two_covariate(x_candidate, x_anchor, ds.phenotype);
        const std::vector<int> retained{0, 1};
        const auto above = conditional_analysis(retained, split, db, oracle.p + 1e-9);
        const auto below = conditional_analysis(retained, split, db, oracle.p - 1e-9);
        const bool kept_above = std::find(above.begin(), above.end(), 0) != above.end();
        const bool kept_below = std::find(below.begin(), below.end(), 0) != below.end();
        if (!kept_above || kept_below) wald_ok = false;
    }

    std::ostringstream detail;
    detail << "duplicates " << (duplicates_ok ? "ok" : "bad") << ", post-prune threshold "
           << (threshold_ok ? "ok" : "bad") << ", BH exact " << (bh_ok ? "ok" : "bad")
           << ", Wald@1e-9 " << (wald_ok ? "ok" : "bad");
    report(5, "LD node: duplicates, threshold, BH-FDR, Wald",
           duplicates_ok && threshold_ok && bh_ok && wald_ok, detail.str());
}

// ---- criteria 6 + 7 + first-replicate timing for criterion 1 ----

struct DeskExperiment {
    double starbase_accuracy = 0.0;
    double random_accuracy = 0.0;
    double starbase_precision = 0.0;
    double random_precision = 0.0;
    double first_replicate_seconds = 0.0;
    std::uint64_t first_replicate_evaluations = 0;
    int top4_successes = 0;
    int replicates = 0;
    bool scores_in_range = true;
    std::vector<double> realized_r2;
};

DeskExperiment run_desk_experiment(const DeskCohort& cohort) {
    DeskExperiment experiment;
    for (const auto& truth : cohort.planted)
        experiment.realized_r2.push_back(truth.realized_marginal_r2);

    const int replicates = 10;
    experiment.replicates = replicates;
    std::vector<double> sb_acc, rd_acc, sb_prec, rd_prec;

    for (int i = 0; i < replicates; ++i) {
        const std::uint64_t seed = derive_seed(4242, 6, static_cast<std::uint64_t>(i));

        auto sb_cfg = desk_config(cohort, work_dir() / ("sb_" + std::to_string(i)));
        sb_cfg.evo.seed = seed;
        const auto t0 = std::chrono::steady_clock::now();
        const auto sb = run(sb_cfg);
        if (i == 0) {
            experiment.first_replicate_seconds = seconds_since(t0);
            experiment.first_replicate_evaluations = sb.ledger.ops.evaluations;
        }
        sb_acc.push_back(sb.qtl_accuracy);
        if (sb.qtl_mean_precision.has_value()) sb_prec.push_back(*sb.qtl_mean_precision);

        auto rd_cfg = desk_config(cohort, work_dir() / ("rd_" + std::to_string(i)));
        rd_cfg.evo.seed = seed;
        rd_cfg.mode = Mode::Random;  // same derived budget as the starbase run
        const auto rd = run(rd_cfg);
        rd_acc.push_back(rd.qtl_accuracy);
        if (rd.qtl_mean_precision.has_value()) rd_prec.push_back(*rd.qtl_mean_precision);

        // criterion 7 bookkeeping on the starbase replicate
        for (const auto& entry : sb.consistency) {
            if (!(entry.score > 0.0) || entry.score > 1.0) experiment.scores_in_range = false;
        }
        int matched = 0;
        std::vector<bool> taken(cohort.planted.size(), false);
        const std::size_t top = std::min<std::size_t>(4, sb.consistency.size());
        for (std::size_t k = 0; k < top; ++k) {
            const auto& snp = sb.consistency[k].snp;
            for (std::size_t q = 0; q < cohort.planted.size(); ++q) {
                if (taken[q]) continue;
                const auto& target = cohort.planted[q].qtl.snp;
                if (target.chromosome == snp.chromosome &&
                    std::llabs(target.position - snp.position) <= 1'000'000) {
                    taken[q] = true;
                    ++matched;
                    break;
                }
            }
        }
        if (matched == static_cast<int>(cohort.planted.size())) ++experiment.top4_successes;

        std::printf("  replicate %d: starbase acc=%.2f prec=%.0fbp | random acc=%.2f prec=%.0fbp\n",
                    i, sb.qtl_accuracy, sb.qtl_mean_precision.value_or(-1.0), rd.qtl_accuracy,
                    rd.qtl_mean_precision.value_or(-1.0));
        std::fflush(stdout);
    }

    auto mean = [](const std::vector<double>& v) {
        return v.empty() ? 0.0
                         : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    experiment.starbase_accuracy = mean(sb_acc);
    experiment.random_accuracy = mean(rd_acc);
    experiment.starbase_precision = mean(sb_prec);
    experiment.random_precision = mean(rd_prec);
    return experiment;
}

void criterion_qtl_recovery(const DeskExperiment& experiment) {
    bool cohort_ok = true;
    for (double r2 : experiment.realized_r2)
        if (r2 < 0.03 || r2 > 0.10) cohort_ok = false;

    const bool accuracy_ok = experiment.starbase_accuracy >= 0.9;
    const bool random_lower = experiment.random_accuracy < experiment.starbase_accuracy;
    const bool precision_ok = experiment.starbase_precision <= experiment.random_precision;

    std::ostringstream detail;
    detail << "starbase acc=" << experiment.starbase_accuracy
           << " random acc=" << experiment.random_accuracy
           << " | starbase prec=" << experiment.starbase_precision
           << "bp random prec=" << experiment.random_precision
           << "bp | realized r2 in [0.03,0.10] " << (cohort_ok ? "yes" : "NO");
    report(6, "planted-QTL recovery: starbase vs random",
           cohort_ok && accuracy_ok && random_lower && precision_ok, detail.str());
}

void criterion_consistency(const DeskExperiment& experiment) {
    // constructed fixture: a SNP ranked 1 in every front pipeline scores 1.0
    SnpDataset ds;
    ds.phenotype = {0, 0, 0, 0};
    ds.labels = {{1, 10}, {1, 20}};
    ds.genotypes = GenotypeMatrix(4, 2);
    SnpDb db(ds.labels, assign_bins(ds, 4), true);
    std::vector<PipelineImportances> front(4);
    for (auto& p : front) {
        p.cols = {0, 1};
        p.pfi = {0.8, 0.1};
    }
    const auto entries = consistency_scores(front, db);
    const bool exact_one = !entries.empty() && entries[0].score == 1.0 &&
                           entries[0].mean_rank == 1.0 && entries[0].appearance_proportion == 1.0;

    const bool top4_ok = experiment.top4_successes >= 8;
    std::ostringstream detail;
    detail << "scores in (0,1]: " << (experiment.scores_in_range ? "yes" : "NO")
           << ", rank-1-everywhere score==1: " << (exact_one ? "yes" : "NO")
           << ", top-4 matches planted QTLs in " << experiment.top4_successes << "/"
           << experiment.replicates << " replicates";
    report(7, "consistency scores", experiment.scores_in_range && exact_one && top4_ok,
           detail.str());
}

// ---- criterion 8: PFI sanity ----

void criterion_pfi() {
    Rng rng(2718);
    int separated = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        const int n = 150;
        Eigen::MatrixXd X(n, 2);
        Eigen::VectorXd y(n);
        const double levels[3] = {0.0, 0.5, 1.0};
        for (int i = 0; i < n; ++i) {
            X(i, 0) = levels[rng.next_below(3)];
            X(i, 1) = levels[rng.next_below(3)];
            y[i] = X(i, 0) + 0.5 * rng.normal();
        }
        RegressorSpec spec{RegressorKind::Linear, {0, 0, 0}};
        Rng fit_rng(derive_seed(1, 0, static_cast<std::uint64_t>(t)));
        const auto model = fit_regressor(spec, X, y, fit_rng);
        Rng pfi_rng(derive_seed(2, 0, static_cast<std::uint64_t>(t)));
        const auto importances = permutation_importance(model, X, y, 100, pfi_rng);
        if (importances[0] > importances[1]) ++separated;
    }

    // 100-permutation estimates vs a 10,000-permutation oracle within 0.02
    bool close = true;
    {
        const int n = 250;
        Eigen::MatrixXd X(n, 3);
        Eigen::VectorXd y(n);
        const double levels[3] = {0.0, 0.5, 1.0};
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < 3; ++j) X(i, j) = levels[rng.next_below(3)];
            y[i] = 0.8 * X(i, 0) + 0.3 * X(i, 1) + 0.3 * rng.normal();
        }
        RegressorSpec spec{RegressorKind::Linear, {0, 0, 0}};
        Rng fit_rng(11);
        const auto model = fit_regressor(spec, X, y, fit_rng);
        Rng small_rng(21), large_rng(22);
        const auto small = permutation_importance(model, X, y, 100, small_rng);
        const auto large = permutation_importance(model, X, y, 10'000, large_rng);
        for (std::size_t j = 0; j < small.size(); ++j)
            if (std::fabs(small[j] - large[j]) > 0.02) close = false;
    }

    report(8, "PFI separates planted from null and matches the high-rep oracle",
           separated >= 99 && close,
           "separation " + std::to_string(separated) + "/100, 100-vs-10000 within 0.02: " +
               (close ? "yes" : "no"));
}

// ---- criterion 9: determinism ----

void criterion_determinism() {
    SynthSpec spec;
    spec.n_samples = 300;
    spec.n_snps = 400;
    spec.chromosomes = 6;
    spec.block_size = 5;
    spec.block_corr = 0.5;
    spec.noise_variance = 1.0;
    spec.seed = 515;
    spec.qtls = {{{2, 1'000'000}, InheritanceModel::Additive, 0.0, 0.12},
                 {{5, 2'000'000}, InheritanceModel::Recessive, 0.0, 0.10}};
    const auto synth = generate_synthetic(spec);
    const auto dir = work_dir() / "determinism";
    fs::create_directories(dir);
    save_dataset(synth.dataset, (dir / "dataset.csv").string());
    write_truth_manifest(synth, (dir / "truth.csv").string());

    RunConfig cfg;
    cfg.dataset_path = (dir / "dataset.csv").string();
    cfg.targets_path = (dir / "truth.csv").string();
    cfg.evo.population_size = 40;
    cfg.evo.generations = 5;
    cfg.evo.min_snps = 5;
    cfg.evo.max_snps = 15;  // 150 train rows
    cfg.evo.bin_size = 30;
    cfg.evo.seed = 616;

    auto cfg_a = cfg;
    cfg_a.output_dir = (dir / "a").string();
    cfg_a.evo.workers = 1;
    auto cfg_b = cfg;
    cfg_b.output_dir = (dir / "b").string();
    cfg_b.evo.workers = 4;
    run(cfg_a);
    run(cfg_b);

    bool identical = true;
    std::string first_diff;
    for (const char* name : {"ledger.csv", "history.csv", "pareto_front.csv", "consistency.csv",
                             "snp_db.csv", "qc_report.csv", "qtl_report.csv"}) {
        if (slurp(dir / "a" / name) != slurp(dir / "b" / name)) {
            identical = false;
            if (first_diff.empty()) first_diff = name;
        }
    }
    // metrics.csv: identical except the wall-clock runtime_seconds column
    const auto ma = csv::read_table((dir / "a" / "metrics.csv").string());
    const auto mb = csv::read_table((dir / "b" / "metrics.csv").string());
    for (std::size_t col = 0; col + 1 < ma.header.size(); ++col) {
        if (ma.rows[0][col] != mb.rows[0][col]) {
            identical = false;
            if (first_diff.empty()) first_diff = "metrics.csv:" + ma.header[col];
        }
    }
    report(9, "byte-identical summaries across worker counts", identical,
           identical ? "workers 1 vs 4 emit identical files"
                     : "first difference in " + first_diff);
}

// ---- criterion 10: mode ablations ----

void criterion_modes() {
    SynthSpec spec;
    spec.n_samples = 250;
    spec.n_snps = 300;
    spec.chromosomes = 5;
    spec.block_size = 5;
    spec.block_corr = 0.5;
    spec.noise_variance = 1.0;
    spec.seed = 717;
    spec.qtls = {{{1, 1'500'000}, InheritanceModel::Dominant, 0.0, 0.08}};
    const auto synth = generate_synthetic(spec);
    const auto dir = work_dir() / "modes";
    fs::create_directories(dir);
    save_dataset(synth.dataset, (dir / "dataset.csv").string());

    RunConfig cfg;
    cfg.dataset_path = (dir / "dataset.csv").string();
    cfg.evo.population_size = 15;
    cfg.evo.generations = 4;
    cfg.evo.min_snps = 6;
    cfg.evo.max_snps = 12;  // 125 train rows
    cfg.evo.bin_size = 25;
    cfg.evo.seed = 818;
    cfg.evo.workers = 1;

    auto basic_cfg = cfg;
    basic_cfg.mode = Mode::BasicGp;
    basic_cfg.output_dir = (dir / "basic").string();
    const auto basic = run(basic_cfg);
    const bool basic_ok = basic.ledger.db.pruned_flag_writes == 0 &&
                          basic.ledger.db.uninformative_flag_writes == 0 &&
                          basic.ledger.db.smart_recommendations == 0 &&
                          basic.ledger.ops.ld_groups_processed == 0;

    auto random_cfg = cfg;
    random_cfg.mode = Mode::Random;
    random_cfg.output_dir = (dir / "random").string();
    const auto random_summary = run(random_cfg);
    const bool random_ok = random_summary.ledger.ops.crossover_ops == 0 &&
                           random_summary.ledger.ops.mutation_ops == 0 &&
                           random_summary.ledger.db.smart_recommendations == 0 &&
                           random_summary.ledger.ops.evaluations == random_cfg.derived_budget();

    std::ostringstream detail;
    detail << "basic-gp: pruned=" << basic.ledger.db.pruned_flag_writes
           << " smart=" << basic.ledger.db.smart_recommendations
           << " ld=" << basic.ledger.ops.ld_groups_processed
           << " | random: crossover=" << random_summary.ledger.ops.crossover_ops
           << " mutation=" << random_summary.ledger.ops.mutation_ops
           << " evals=" << random_summary.ledger.ops.evaluations;
    report(10, "mode ablation ledgers", basic_ok && random_ok, detail.str());
}

}  // namespace

template <typename Fn>
void guarded(int id, const char* name, Fn&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        report(id, name, false, std::string("exception: ") + e.what());
    }
}

int main() {
    std::printf("== acceptance suite ==\n");
    const auto start = std::chrono::steady_clock::now();

    guarded(2, "NSGA-II sort/crowding/survival vs brute force", [] { criterion_nsga(); });
    guarded(3, "hypervolume", [] { criterion_hypervolume(); });
    guarded(4, "encoding recovery", [] { criterion_encoding(); });
    guarded(5, "LD node", [] { criterion_ld(); });
    guarded(8, "PFI sanity", [] { criterion_pfi(); });
    guarded(9, "determinism", [] { criterion_determinism(); });
    guarded(10, "mode ablations", [] { criterion_modes(); });

    std::printf("building desk-scale cohort (1000 x 2000, 4 QTLs)...\n");
    std::fflush(stdout);
    guarded(6, "planted-QTL recovery", [&] {
        const auto cohort = make_desk_cohort();
        const auto experiment = run_desk_experiment(cohort);
        criterion_qtl_recovery(experiment);
        guarded(7, "consistency scores", [&] { criterion_consistency(experiment); });
        guarded(1, "budget reproduction", [&] {
            criterion_budget(experiment.first_replicate_seconds,
                             experiment.first_replicate_evaluations);
        });
    });

    std::sort(g_results.begin(), g_results.end(),
              [](const Criterion& a, const Criterion& b) { return a.id < b.id; });
    int failed = 0;
    std::printf("\n== summary (%.1fs total) ==\n", seconds_since(start));
    for (const auto& result : g_results) {
        std::printf("[%s] criterion %d: %s\n", result.pass ? "PASS" : "FAIL", result.id,
                    result.name.c_str());
        if (!result.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
