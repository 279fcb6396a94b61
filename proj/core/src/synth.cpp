#include "evoqtl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "evoqtl/csv.hpp"
#include "evoqtl/rng.hpp"
#include "evoqtl/stats.hpp"

namespace evoqtl {

namespace {
constexpr std::uint64_t kStreamSynth = 5;
}

void SynthSpec::validate() const {
    if (n_samples < 2) throw std::invalid_argument("synth: need n_samples >= 2");
    if (n_snps < 1) throw std::invalid_argument("synth: need n_snps >= 1");
    if (chromosomes < 1 || chromosomes > n_snps)
        throw std::invalid_argument("synth: chromosomes must lie in [1, n_snps]");
    if (!(maf_min > 0.0) || maf_min > maf_max || maf_max > 0.5)
        throw std::invalid_argument("synth: need 0 < maf_min <= maf_max <= 0.5");
    if (block_size < 1) throw std::invalid_argument("synth: block_size must be >= 1");
    if (block_corr < 0.0 || block_corr > 1.0)
        throw std::invalid_argument("synth: block_corr must lie in [0, 1]");
    if (noise_variance < 0.0) throw std::invalid_argument("synth: noise_variance must be >= 0");
    if (gap_min_bp < 1 || gap_max_bp < gap_min_bp)
        throw std::invalid_argument("synth: need 1 <= gap_min_bp <= gap_max_bp");
    for (const auto& qtl : qtls) {
        if (qtl.model == InheritanceModel::Pager)
            throw std::invalid_argument("synth: planted models must be strict");
        if (!(qtl.effect > 0.0) && !(qtl.target_marginal_r2 > 0.0))
            throw std::invalid_argument("synth: planted effect sizes must be > 0");
        if (qtl.target_marginal_r2 < 0.0 || qtl.target_marginal_r2 >= 1.0)
            throw std::invalid_argument("synth: target marginal r2 must lie in [0, 1)");
        if (qtl.snp.chromosome < 1 || qtl.snp.chromosome > chromosomes)
            throw std::invalid_argument("synth: planted QTL outside the generated map");
    }
}

SynthResult generate_synthetic(const SynthSpec& spec) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, kStreamSynth));

    SynthResult result;
    SnpDataset& ds = result.dataset;
    const auto n = static_cast<std::size_t>(spec.n_samples);
    ds.genotypes = GenotypeMatrix(n, static_cast<std::size_t>(spec.n_snps));
    ds.labels.reserve(static_cast<std::size_t>(spec.n_snps));

    // Chromosome sizes: n_snps split as evenly as possible.
    const int base = spec.n_snps / spec.chromosomes;
    const int extra = spec.n_snps % spec.chromosomes;

    std::vector<std::int8_t> seed_a1(n), seed_a2(n);
    int col = 0;
    const double redraw = 1.0 - std::sqrt(std::clamp(spec.block_corr, 0.0, 1.0));
    for (int chrom = 1; chrom <= spec.chromosomes; ++chrom) {
        const int count = base + (chrom <= extra ? 1 : 0);
        std::int64_t position = 100'000;
        int in_block = 0;
        double block_p = 0.0;
        for (int k = 0; k < count; ++k, ++col) {
            if (in_block == 0) {
                block_p = spec.maf_min + rng.uniform() * (spec.maf_max - spec.maf_min);
                for (std::size_t i = 0; i < n; ++i) {
                    seed_a1[i] = rng.bernoulli(block_p) ? 1 : 0;
                    seed_a2[i] = rng.bernoulli(block_p) ? 1 : 0;
                }
            }
            auto column = ds.genotypes.col(static_cast<std::size_t>(col));
            for (std::size_t i = 0; i < n; ++i) {
                const std::int8_t a1 =
                    rng.bernoulli(redraw) ? (rng.bernoulli(block_p) ? 1 : 0) : seed_a1[i];
                const std::int8_t a2 =
                    rng.bernoulli(redraw) ? (rng.bernoulli(block_p) ? 1 : 0) : seed_a2[i];
                column[i] = static_cast<std::int8_t>(a1 + a2);
            }
            ds.labels.push_back(SnpLabel{chrom, position});
            position += spec.gap_min_bp + static_cast<std::int64_t>(rng.next_below(
                            static_cast<std::uint64_t>(spec.gap_max_bp - spec.gap_min_bp) + 1));
            if (++in_block == spec.block_size) in_block = 0;
        }
    }

    // Snap each planted QTL to the nearest generated SNP on its chromosome.
    std::vector<int> qtl_cols;
    std::vector<PlantedQtl> planted = spec.qtls;
    for (auto& qtl : planted) {
        int best_col = -1;
        std::int64_t best_distance = std::numeric_limits<std::int64_t>::max();
        for (int j = 0; j < spec.n_snps; ++j) {
            if (ds.labels[j].chromosome != qtl.snp.chromosome) continue;
            const std::int64_t d = std::llabs(ds.labels[j].position - qtl.snp.position);
            if (d < best_distance) {
                best_distance = d;
                best_col = j;
            }
        }
        if (best_col < 0) throw std::invalid_argument("synth: planted QTL on an empty chromosome");
        qtl.snp = ds.labels[best_col];
        qtl_cols.push_back(best_col);
    }

    // Encoded effect columns; calibrate effects to target marginal r^2 when
    // requested: effect^2 * var(enc) = target * var(y), with
    // var(y) = noise / (1 - sum targets) when every QTL is target-driven.
    std::vector<std::vector<double>> encoded(planted.size(), std::vector<double>(n));
    for (std::size_t q = 0; q < planted.size(); ++q)
        encode_column(ds.genotypes.col(static_cast<std::size_t>(qtl_cols[q])),
                      strict_codes(planted[q].model), encoded[q]);

    double target_sum = 0.0;
    bool any_target = false;
    for (const auto& qtl : planted) {
        if (qtl.target_marginal_r2 > 0.0) {
            any_target = true;
            target_sum += qtl.target_marginal_r2;
        }
    }
    if (any_target) {
        if (target_sum >= 1.0)
            throw std::invalid_argument("synth: target marginal r2 values must sum below 1");
        const double total_variance = spec.noise_variance / (1.0 - target_sum);
        for (std::size_t q = 0; q < planted.size(); ++q) {
            if (!(planted[q].target_marginal_r2 > 0.0)) continue;
            const double enc_var = stats::variance(encoded[q]);
            if (!(enc_var > 0.0))
                throw std::runtime_error("synth: planted QTL column is monomorphic");
            planted[q].effect =
                std::sqrt(planted[q].target_marginal_r2 * total_variance / enc_var);
        }
    }

    ds.phenotype.assign(n, 0.0);
    const double noise_sd = std::sqrt(spec.noise_variance);
    for (std::size_t i = 0; i < n; ++i) {
        double value = 0.0;
        for (std::size_t q = 0; q < planted.size(); ++q)
            value += planted[q].effect * encoded[q][i];
        ds.phenotype[i] = value + noise_sd * rng.normal();
    }
    ds.validate();

    for (std::size_t q = 0; q < planted.size(); ++q) {
        SynthTruth truth;
        truth.qtl = planted[q];
        const auto fit = stats::ols_univariate(encoded[q], ds.phenotype);
        if (fit.degenerate) {
            truth.realized_marginal_r2 = 0.0;
        } else {
            std::vector<double> predicted(n);
            for (std::size_t i = 0; i < n; ++i)
                predicted[i] = fit.intercept + fit.slope * encoded[q][i];
            truth.realized_marginal_r2 = stats::r2_out_of_sample(predicted, ds.phenotype);
        }
        result.truth.push_back(truth);
    }
    return result;
}

void write_truth_manifest(const SynthResult& result, const std::string& path) {
    csv::Writer out(path);
    out.row({"snp", "model", "effect", "target_r2", "realized_r2"});
    for (const auto& truth : result.truth) {
        out.row({to_string(truth.qtl.snp), std::string(model_name(truth.qtl.model)),
                 csv::format_double(truth.qtl.effect),
                 csv::format_double(truth.qtl.target_marginal_r2),
                 csv::format_double(truth.realized_marginal_r2)});
    }
}

}  // namespace evoqtl
