#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evoqtl/dataset.hpp"
#include "evoqtl/encoding.hpp"

namespace evoqtl {

struct PlantedQtl {
    SnpLabel snp;                                          // snapped to the nearest generated SNP
    InheritanceModel model = InheritanceModel::Additive;   // strict models only
    double effect = 1.0;
    double target_marginal_r2 = 0.0;  // > 0 calibrates the effect to this full-data r^2
};

struct SynthSpec {
    int n_samples = 1000;
    int n_snps = 2000;
    int chromosomes = 10;
    double maf_min = 0.1;
    double maf_max = 0.5;
    int block_size = 10;       // SNPs per LD block
    double block_corr = 0.6;   // target pairwise genotype correlation inside a block
    std::int64_t gap_min_bp = 20'000;  // inter-SNP spacing drawn uniformly
    std::int64_t gap_max_bp = 80'000;
    std::vector<PlantedQtl> qtls;
    double noise_variance = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthTruth {
    PlantedQtl qtl;
    double realized_marginal_r2 = 0.0;  // full-data in-sample univariate r^2
};

struct SynthResult {
    SnpDataset dataset;
    std::vector<SynthTruth> truth;
};

// Genotypes are drawn per LD block from a latent seed haplotype with per-site
// redraw probability 1 - sqrt(block_corr); the phenotype is the sum of the
// planted encoded effects plus Gaussian noise.
SynthResult generate_synthetic(const SynthSpec& spec);

void write_truth_manifest(const SynthResult& result, const std::string& path);

}  // namespace evoqtl
