#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "evoqtl/snp_label.hpp"

namespace evoqtl {

constexpr std::int8_t kMissingGenotype = -1;

// Column-major sample-by-SNP genotype store. Values are {0,1,2} minor-allele
// counts or kMissingGenotype.
class GenotypeMatrix {
public:
    GenotypeMatrix() = default;
    GenotypeMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    std::int8_t at(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }
    void set(std::size_t r, std::size_t c, std::int8_t v) { data_[c * rows_ + r] = v; }

    std::span<const std::int8_t> col(std::size_t c) const {
        return {data_.data() + c * rows_, rows_};
    }
    std::span<std::int8_t> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::int8_t> data_;
};

struct SnpDataset {
    GenotypeMatrix genotypes;
    std::vector<double> phenotype;  // one value per sample, never missing
    std::vector<SnpLabel> labels;   // one label per SNP column

    std::size_t n_samples() const { return genotypes.rows(); }
    std::size_t n_snps() const { return genotypes.cols(); }

    // Checks label uniqueness, phenotype completeness and n_samples >= 2.
    void validate() const;
};

struct DataSplit {
    SnpDataset train;
    SnpDataset validate;
    double split_fraction = 0.5;
};

using BinId = int;

struct BinIndex {
    int bin_size = 0;
    std::unordered_map<SnpLabel, BinId, SnpLabelHash> bin_of;
    std::vector<std::vector<int>> bins;          // BinId -> dataset columns, ascending position
    std::vector<std::int32_t> bin_chromosome;    // BinId -> chromosome
    std::vector<BinId> bin_of_col;               // dataset column -> BinId

    int bin_count() const { return static_cast<int>(bins.size()); }
};

struct QcRemoval {
    SnpLabel snp;
    std::string reason;  // zero_variance | missingness | maf
};

struct QcReport {
    std::vector<QcRemoval> removed;
};

// min(p, 1-p) with p the alternate-allele frequency over non-missing entries.
// Throws if the column is entirely missing.
double minor_allele_frequency(std::span<const std::int8_t> column);

// Drops zero-variance columns, columns with missing fraction >= max_missing,
// and columns with MAF <= min_maf (thresholds inclusive). Throws if nothing
// survives.
SnpDataset qc_filter(const SnpDataset& ds, double max_missing, double min_maf,
                     QcReport* report = nullptr);

// Replaces every missing genotype with its column mode; ties go to the
// smaller genotype code. Throws on a fully missing column.
SnpDataset impute_mode(const SnpDataset& ds);

// Deterministic shuffle split; train receives floor(fraction * n) samples.
DataSplit split_dataset(const SnpDataset& ds, double fraction, std::uint64_t seed);

// Per chromosome, sorts SNPs by position and chunks into consecutive groups
// of bin_size. Bins never span chromosomes.
BinIndex assign_bins(const SnpDataset& ds, int bin_size);

// File format: header "phenotype,<chr.pos>,<chr.pos>,..."; one row per
// sample; comma or tab separated; missing genotypes empty or "NA".
SnpDataset load_dataset(const std::string& path);
void save_dataset(const SnpDataset& ds, const std::string& path);

void write_qc_report(const QcReport& report, const std::string& path);

}  // namespace evoqtl
