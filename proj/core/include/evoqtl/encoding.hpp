#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "evoqtl/dataset.hpp"

namespace evoqtl {

enum class InheritanceModel : std::uint8_t {
    Additive,
    Superadditive,
    Subadditive,
    Dominant,
    Recessive,
    Heterosis,
    Overdominant,
    Underdominant,
    Pager,
};

constexpr int kStrictModelCount = 8;
constexpr int kModelCount = 9;

using CodeTriple = std::array<double, 3>;

// Fixed genotype-class codes for the eight strict inheritance models, kept in
// one table so an alternative transcription can be swapped in wholesale.
// Throws for Pager, whose codes are data-derived.
CodeTriple strict_codes(InheritanceModel model);

std::string_view model_name(InheritanceModel model);
std::optional<InheritanceModel> model_from_name(std::string_view name);

struct EncodingResult {
    InheritanceModel model = InheritanceModel::Additive;
    double marginal_validation_r2 = 0.0;
    std::optional<CodeTriple> pager_codes;  // present iff model == Pager

    CodeTriple codes() const {
        return model == InheritanceModel::Pager ? *pager_codes : strict_codes(model);
    }
};

// Normalized per-genotype-class phenotype means. A class absent from the
// data falls back to its additive code. Throws std::runtime_error when the
// present class means are all equal (degenerate encoding).
CodeTriple compute_pager_codes(std::span<const std::int8_t> genotypes,
                               std::span<const double> phenotype);

void encode_column(std::span<const std::int8_t> genotypes, const CodeTriple& codes,
                   std::span<double> out);

// Fits phenotype ~ intercept + encoded genotype on the train rows and scores
// r^2 on the validate rows. Zero encoded train variance yields -infinity.
double marginal_validation_r2(std::span<const std::int8_t> train_geno,
                              std::span<const double> train_pheno,
                              std::span<const std::int8_t> validate_geno,
                              std::span<const double> validate_pheno, const CodeTriple& codes);

// Evaluates all nine encodings and returns the argmax by marginal validation
// r^2. Ties prefer Additive, then the fixed model order. Degenerate PAGER
// codes are skipped.
EncodingResult select_optimal_encoding(std::span<const std::int8_t> train_geno,
                                       std::span<const double> train_pheno,
                                       std::span<const std::int8_t> validate_geno,
                                       std::span<const double> validate_pheno);

EncodingResult select_optimal_encoding(const DataSplit& split, int col);

}  // namespace evoqtl
