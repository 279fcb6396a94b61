#include "evoqtl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "evoqtl/csv.hpp"
#include "evoqtl/stats.hpp"

namespace evoqtl {

std::vector<double> permutation_importance(const FittedModel& model,
                                           const Eigen::MatrixXd& validate_X,
                                           const Eigen::VectorXd& validate_y, int n_permutations,
                                           Rng& rng) {
    const double baseline = r2_score(model, validate_X, validate_y);
    const auto n = static_cast<std::size_t>(validate_X.rows());

    std::vector<double> importances(static_cast<std::size_t>(validate_X.cols()), 0.0);
    Eigen::MatrixXd permuted = validate_X;
    std::vector<int> order(n);
    for (Eigen::Index j = 0; j < validate_X.cols(); ++j) {
        double total = 0.0;
        for (int perm = 0; perm < n_permutations; ++perm) {
            std::iota(order.begin(), order.end(), 0);
            rng.shuffle(order);
            for (std::size_t i = 0; i < n; ++i)
                permuted(static_cast<Eigen::Index>(i), j) = validate_X(order[i], j);
            total += r2_score(model, permuted, validate_y);
        }
        permuted.col(j) = validate_X.col(j);
        importances[static_cast<std::size_t>(j)] =
            baseline - total / static_cast<double>(n_permutations);
    }
    return importances;
}

std::vector<ConsistencyEntry> consistency_scores(std::span<const PipelineImportances> per_pipeline,
                                                 const SnpDb& db) {
    if (per_pipeline.empty()) return {};

    struct Accumulator {
        double rank_sum = 0.0;
        int appearances = 0;
    };
    std::unordered_map<int, Accumulator> by_col;

    for (const auto& pipeline : per_pipeline) {
        std::vector<std::size_t> order(pipeline.cols.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (pipeline.pfi[a] != pipeline.pfi[b]) return pipeline.pfi[a] > pipeline.pfi[b];
            return db.record(pipeline.cols[a]).snp < db.record(pipeline.cols[b]).snp;
        });
        for (std::size_t rank = 0; rank < order.size(); ++rank) {
            auto& acc = by_col[pipeline.cols[order[rank]]];
            acc.rank_sum += static_cast<double>(rank + 1);
            ++acc.appearances;
        }
    }

    std::vector<ConsistencyEntry> entries;
    entries.reserve(by_col.size());
    const auto front_size = static_cast<double>(per_pipeline.size());
    for (const auto& [col, acc] : by_col) {
        ConsistencyEntry entry;
        entry.snp = db.record(col).snp;
        entry.mean_rank = acc.rank_sum / static_cast<double>(acc.appearances);
        entry.appearance_proportion = static_cast<double>(acc.appearances) / front_size;
        entry.score = entry.appearance_proportion / entry.mean_rank;
        entry.modal_encoding = db.record(col).evaluation.has_value()
                                   ? db.record(col).evaluation->model
                                   : InheritanceModel::Additive;
        entries.push_back(entry);
    }
    std::sort(entries.begin(), entries.end(), [](const ConsistencyEntry& a,
                                                 const ConsistencyEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.snp < b.snp;
    });
    return entries;
}

double complexity_to_objective(int complexity) {
    return 1.0 - (static_cast<double>(complexity) - 1.0) / 149.0;
}

double hypervolume(std::span<const std::pair<double, int>> front) {
    if (front.empty()) return 0.0;
    std::vector<std::pair<double, double>> points;  // (r2, transformed complexity)
    points.reserve(front.size());
    for (const auto& [r2, complexity] : front) {
        if (r2 < 0.0) throw std::invalid_argument("hypervolume: negative r2 member");
        points.emplace_back(r2, complexity_to_objective(complexity));
    }
    std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;
    });
    double area = 0.0, covered_y = 0.0;
    for (const auto& [x, y] : points) {
        if (y > covered_y) {
            area += x * (y - covered_y);
            covered_y = y;
        }
    }
    return area;
}

int snp_diversity(std::span<const Evaluated> front, const SnpDb& db) {
    std::unordered_set<BinId> bins;
    for (const auto& member : front)
        for (int col : member.eval.survivors) bins.insert(db.record(col).bin_id);
    return static_cast<int>(bins.size());
}

std::vector<QtlHit> qtl_report(std::span<const SnpLabel> front_snps,
                               std::span<const QtlTarget> targets) {
    std::vector<QtlHit> hits;
    hits.reserve(targets.size());
    for (const auto& target : targets) {
        QtlHit hit;
        hit.target = target;
        std::int64_t best = std::numeric_limits<std::int64_t>::max();
        for (const auto& snp : front_snps) {
            if (snp.chromosome != target.snp.chromosome) continue;
            const std::int64_t distance = std::llabs(snp.position - target.snp.position);
            if (distance <= target.window_bp) best = std::min(best, distance);
        }
        if (best != std::numeric_limits<std::int64_t>::max()) {
            hit.hit = true;
            hit.precision_bp = best;
        }
        hits.push_back(hit);
    }
    return hits;
}

InheritanceFit validate_inheritance(std::span<const std::int8_t> genotypes,
                                    std::span<const double> phenotype) {
    if (genotypes.size() != phenotype.size() || genotypes.empty())
        throw std::invalid_argument("validate_inheritance: size mismatch or empty input");
    std::array<std::int64_t, 3> counts{0, 0, 0};
    for (std::int8_t g : genotypes) {
        if (g < 0 || g > 2) throw std::invalid_argument("validate_inheritance: missing genotype");
        ++counts[g];
    }
    if (counts[0] == 0 || counts[1] == 0 || counts[2] == 0)
        throw std::runtime_error("validate_inheritance: all three genotype classes required");

    const auto [lo_it, hi_it] = std::minmax_element(phenotype.begin(), phenotype.end());
    const double lo = *lo_it, hi = *hi_it;
    if (hi == lo) throw std::runtime_error("validate_inheritance: constant phenotype");

    InheritanceFit best;
    best.correlation = -std::numeric_limits<double>::infinity();
    std::vector<double> expected(genotypes.size());
    for (int m = 0; m < kStrictModelCount; ++m) {
        const auto model = static_cast<InheritanceModel>(m);
        const CodeTriple codes = strict_codes(model);
        for (int mirrored = 0; mirrored < 2; ++mirrored) {
            CodeTriple used = codes;
            if (mirrored) {
                for (double& c : used) c = 1.0 - c;
            }
            for (std::size_t i = 0; i < genotypes.size(); ++i)
                expected[i] = lo + used[genotypes[i]] * (hi - lo);
            const double corr = stats::pearson(expected, phenotype);
            if (corr > best.correlation) {
                best.correlation = corr;
                best.model = model;
                best.mirrored = mirrored != 0;
            }
        }
    }
    return best;
}

std::vector<Peak> top_peaks(std::span<const ReplicateConsistency> replicates, int k,
                            std::int64_t window_bp) {
    struct Aggregate {
        double score_sum = 0.0;
        int replicate_count = 0;
        std::map<InheritanceModel, int> encodings;
    };
    std::map<SnpLabel, Aggregate> by_snp;
    for (const auto& replicate : replicates) {
        for (const auto& entry : replicate.entries) {
            auto& agg = by_snp[entry.snp];
            agg.score_sum += entry.score;
            ++agg.replicate_count;
            ++agg.encodings[entry.modal_encoding];
        }
    }

    struct Candidate {
        SnpLabel snp;
        double mean_score;
        int replicate_count;
        InheritanceModel modal;
    };
    std::vector<Candidate> candidates;
    for (const auto& [snp, agg] : by_snp) {
        if (agg.replicate_count < 2) continue;
        InheritanceModel modal = InheritanceModel::Additive;
        int modal_count = -1;
        for (const auto& [model, count] : agg.encodings) {
            if (count > modal_count) {
                modal = model;
                modal_count = count;
            }
        }
        candidates.push_back({snp, agg.score_sum / agg.replicate_count, agg.replicate_count, modal});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.mean_score != b.mean_score) return a.mean_score > b.mean_score;
        return a.snp < b.snp;
    });
    if (static_cast<int>(candidates.size()) > k)
        candidates.resize(static_cast<std::size_t>(k));

    // Greedy region assignment in score order; the first (highest-scoring)
    // member anchors each region.
    std::vector<std::vector<Candidate>> regions;
    for (const auto& candidate : candidates) {
        bool placed = false;
        for (auto& region : regions) {
            const auto& anchor = region.front().snp;
            if (anchor.chromosome == candidate.snp.chromosome &&
                std::llabs(anchor.position - candidate.snp.position) <= window_bp) {
                region.push_back(candidate);
                placed = true;
                break;
            }
        }
        if (!placed) regions.push_back({candidate});
    }

    std::vector<Peak> peaks;
    peaks.reserve(regions.size());
    for (const auto& region : regions) {
        const Candidate* representative = &region.front();
        for (const auto& member : region) {
            if (member.replicate_count > representative->replicate_count ||
                (member.replicate_count == representative->replicate_count &&
                 member.mean_score > representative->mean_score)) {
                representative = &member;
            }
        }
        peaks.push_back({representative->snp, representative->mean_score,
                         representative->replicate_count, representative->modal});
    }
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
        if (a.mean_score != b.mean_score) return a.mean_score > b.mean_score;
        return a.representative < b.representative;
    });
    return peaks;
}

std::vector<Evaluated> extract_front(std::vector<Evaluated> population) {
    if (population.empty()) return {};

    // Staircase scan: within equal r2, only minimum-complexity members can be
    // nondominated, and they survive iff no strictly better r2 achieved an
    // equal-or-lower complexity.
    std::vector<std::size_t> order(population.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (population[a].eval.r2 != population[b].eval.r2)
            return population[a].eval.r2 > population[b].eval.r2;
        return population[a].eval.complexity < population[b].eval.complexity;
    });

    std::vector<std::size_t> front_indices;
    int best_complexity = std::numeric_limits<int>::max();
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        const double r2 = population[order[i]].eval.r2;
        const int group_min = population[order[i]].eval.complexity;
        while (j < order.size() && population[order[j]].eval.r2 == r2) ++j;
        if (group_min < best_complexity) {
            for (std::size_t k = i; k < j; ++k)
                if (population[order[k]].eval.complexity == group_min)
                    front_indices.push_back(order[k]);
            best_complexity = group_min;
        }
        i = j;
    }
    std::sort(front_indices.begin(), front_indices.end());

    std::vector<Evaluated> front;
    front.reserve(front_indices.size());
    for (std::size_t idx : front_indices) front.push_back(std::move(population[idx]));
    return front;
}

std::vector<SnpLabel> front_snp_labels(std::span<const Evaluated> front, const SnpDb& db) {
    std::unordered_set<int> cols;
    for (const auto& member : front)
        for (int col : member.eval.survivors) cols.insert(col);
    std::vector<SnpLabel> labels;
    labels.reserve(cols.size());
    for (int col : cols) labels.push_back(db.record(col).snp);
    std::sort(labels.begin(), labels.end());
    return labels;
}

void write_pareto_front(std::span<const Evaluated> front, const SnpDb& db,
                        const std::string& path) {
    csv::Writer out(path);
    out.row({"r2", "complexity", "snps"});
    for (const auto& member : front) {
        std::string snps;
        for (std::size_t i = 0; i < member.eval.survivors.size(); ++i) {
            if (i) snps += ' ';
            snps += to_string(db.record(member.eval.survivors[i]).snp);
        }
        out.row({csv::format_double(member.eval.r2), csv::format_int(member.eval.complexity),
                 snps});
    }
}

void write_consistency(std::span<const ConsistencyEntry> entries, const std::string& path) {
    csv::Writer out(path);
    out.row({"snp", "chromosome", "position", "mean_rank", "appearance", "score",
             "modal_encoder"});
    for (const auto& entry : entries) {
        out.row({to_string(entry.snp), csv::format_int(entry.snp.chromosome),
                 csv::format_int(entry.snp.position), csv::format_double(entry.mean_rank),
                 csv::format_double(entry.appearance_proportion), csv::format_double(entry.score),
                 std::string(model_name(entry.modal_encoding))});
    }
}

void write_qtl_report(std::span<const QtlHit> hits, const std::string& path) {
    csv::Writer out(path);
    out.row({"target", "hit", "precision_bp"});
    for (const auto& hit : hits) {
        out.row({to_string(hit.target.snp), hit.hit ? "1" : "0",
                 hit.precision_bp.has_value() ? csv::format_int(*hit.precision_bp)
                                              : std::string()});
    }
}

void write_metrics(const RunMetrics& metrics, const std::string& path) {
    csv::Writer out(path);
    out.row({"hypervolume", "front_size", "diversity", "coverage", "runtime_seconds"});
    out.row({csv::format_double(metrics.hypervolume), csv::format_int(metrics.front_size),
             csv::format_int(metrics.diversity), csv::format_double(metrics.coverage),
             csv::format_double(metrics.runtime_seconds)});
}

}  // namespace evoqtl
