#include "evoqtl/encoding.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "evoqtl/stats.hpp"

namespace evoqtl {

namespace {

constexpr std::array<CodeTriple, kStrictModelCount> kStrictCodes = {{
    {0.0, 0.5, 1.0},   // Additive
    {0.0, 0.75, 1.0},  // Superadditive
    {0.0, 0.25, 1.0},  // Subadditive
    {0.0, 1.0, 1.0},   // Dominant
    {0.0, 0.0, 1.0},   // Recessive
    {0.0, 1.0, 0.0},   // Heterosis
    {0.0, 1.0, 0.5},   // Overdominant
    {0.5, 0.0, 1.0},   // Underdominant
}};

constexpr std::array<std::string_view, kModelCount> kModelNames = {
    "additive",     "superadditive", "subadditive",   "dominant", "recessive",
    "heterosis",    "overdominant",  "underdominant", "pager",
};

}  // namespace

CodeTriple strict_codes(InheritanceModel model) {
    if (model == InheritanceModel::Pager)
        throw std::invalid_argument("PAGER codes are data-derived, not fixed");
    return kStrictCodes[static_cast<std::size_t>(model)];
}

std::string_view model_name(InheritanceModel model) {
    return kModelNames[static_cast<std::size_t>(model)];
}

std::optional<InheritanceModel> model_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kModelNames.size(); ++i)
        if (kModelNames[i] == name) return static_cast<InheritanceModel>(i);
    return std::nullopt;
}

CodeTriple compute_pager_codes(std::span<const std::int8_t> genotypes,
                               std::span<const double> phenotype) {
    if (genotypes.size() != phenotype.size() || genotypes.empty())
        throw std::invalid_argument("compute_pager_codes: size mismatch or empty input");

    std::array<double, 3> sum{0.0, 0.0, 0.0};
    std::array<std::int64_t, 3> count{0, 0, 0};
    for (std::size_t i = 0; i < genotypes.size(); ++i) {
        const std::int8_t g = genotypes[i];
        if (g < 0 || g > 2) throw std::invalid_argument("compute_pager_codes: missing genotype");
        sum[g] += phenotype[i];
        ++count[g];
    }

    double min_mean = std::numeric_limits<double>::infinity();
    double max_mean = -std::numeric_limits<double>::infinity();
    std::array<double, 3> class_mean{};
    int present = 0;
    for (int g = 0; g < 3; ++g) {
        if (count[g] == 0) continue;
        ++present;
        class_mean[g] = sum[g] / static_cast<double>(count[g]);
        min_mean = std::min(min_mean, class_mean[g]);
        max_mean = std::max(max_mean, class_mean[g]);
    }
    if (present < 2 || max_mean == min_mean)
        throw std::runtime_error("degenerate PAGER encoding: class means carry no contrast");

    const CodeTriple additive = strict_codes(InheritanceModel::Additive);
    CodeTriple codes{};
    for (int g = 0; g < 3; ++g) {
        codes[g] = count[g] == 0 ? additive[g]
                                 : (class_mean[g] - min_mean) / (max_mean - min_mean);
    }
    return codes;
}

void encode_column(std::span<const std::int8_t> genotypes, const CodeTriple& codes,
                   std::span<double> out) {
    if (out.size() != genotypes.size())
        throw std::invalid_argument("encode_column: output size mismatch");
    for (std::size_t i = 0; i < genotypes.size(); ++i) {
        const std::int8_t g = genotypes[i];
        if (g < 0 || g > 2) throw std::invalid_argument("encode_column: missing genotype");
        out[i] = codes[g];
    }
}

double marginal_validation_r2(std::span<const std::int8_t> train_geno,
                              std::span<const double> train_pheno,
                              std::span<const std::int8_t> validate_geno,
                              std::span<const double> validate_pheno, const CodeTriple& codes) {
    std::vector<double> x(train_geno.size());
    encode_column(train_geno, codes, x);
    const auto fit = stats::ols_univariate(x, train_pheno);
    if (fit.degenerate) return -std::numeric_limits<double>::infinity();

    std::vector<double> predicted(validate_geno.size());
    for (std::size_t i = 0; i < validate_geno.size(); ++i)
        predicted[i] = fit.intercept + fit.slope * codes[validate_geno[i]];
    return stats::r2_out_of_sample(predicted, validate_pheno);
}

EncodingResult select_optimal_encoding(std::span<const std::int8_t> train_geno,
                                       std::span<const double> train_pheno,
                                       std::span<const std::int8_t> validate_geno,
                                       std::span<const double> validate_pheno) {
    EncodingResult best;
    best.model = InheritanceModel::Additive;
    best.marginal_validation_r2 = marginal_validation_r2(train_geno, train_pheno, validate_geno,
                                                         validate_pheno,
                                                         strict_codes(InheritanceModel::Additive));

    for (int m = 1; m < kStrictModelCount; ++m) {
        const auto model = static_cast<InheritanceModel>(m);
        const double r2 = marginal_validation_r2(train_geno, train_pheno, validate_geno,
                                                 validate_pheno, strict_codes(model));
        if (r2 > best.marginal_validation_r2) {
            best.model = model;
            best.marginal_validation_r2 = r2;
            best.pager_codes.reset();
        }
    }

    try {
        const CodeTriple pager = compute_pager_codes(train_geno, train_pheno);
        const double r2 =
            marginal_validation_r2(train_geno, train_pheno, validate_geno, validate_pheno, pager);
        if (r2 > best.marginal_validation_r2) {
            best.model = InheritanceModel::Pager;
            best.marginal_validation_r2 = r2;
            best.pager_codes = pager;
        }
    } catch (const std::runtime_error&) {
        // degenerate PAGER codes: skipped
    }
    return best;
}

EncodingResult select_optimal_encoding(const DataSplit& split, int col) {
    return select_optimal_encoding(split.train.genotypes.col(col), split.train.phenotype,
                                   split.validate.genotypes.col(col), split.validate.phenotype);
}

}  // namespace evoqtl
