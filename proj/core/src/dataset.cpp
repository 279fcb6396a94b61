#include "evoqtl/dataset.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "evoqtl/csv.hpp"
#include "evoqtl/rng.hpp"

namespace evoqtl {

namespace {

bool parse_positive_int(std::string_view s, std::int64_t& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && out > 0;
}

SnpDataset subset_columns(const SnpDataset& ds, const std::vector<int>& cols) {
    SnpDataset out;
    out.phenotype = ds.phenotype;
    out.labels.reserve(cols.size());
    out.genotypes = GenotypeMatrix(ds.n_samples(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        out.labels.push_back(ds.labels[cols[j]]);
        auto src = ds.genotypes.col(cols[j]);
        auto dst = out.genotypes.col(j);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
}

SnpDataset subset_rows(const SnpDataset& ds, const std::vector<std::size_t>& rows) {
    SnpDataset out;
    out.labels = ds.labels;
    out.phenotype.reserve(rows.size());
    for (std::size_t r : rows) out.phenotype.push_back(ds.phenotype[r]);
    out.genotypes = GenotypeMatrix(rows.size(), ds.n_snps());
    for (std::size_t j = 0; j < ds.n_snps(); ++j) {
        auto src = ds.genotypes.col(j);
        auto dst = out.genotypes.col(j);
        for (std::size_t i = 0; i < rows.size(); ++i) dst[i] = src[rows[i]];
    }
    return out;
}

}  // namespace

SnpLabel parse_snp_label(std::string_view text) {
    const std::size_t dot = text.find('.');
    std::int64_t chrom = 0, pos = 0;
    if (dot == std::string_view::npos || !parse_positive_int(text.substr(0, dot), chrom) ||
        !parse_positive_int(text.substr(dot + 1), pos)) {
        throw std::invalid_argument("malformed SNP label '" + std::string(text) +
                                    "' (expected chr.position)");
    }
    return SnpLabel{static_cast<std::int32_t>(chrom), pos};
}

std::string to_string(const SnpLabel& label) {
    return std::to_string(label.chromosome) + "." + std::to_string(label.position);
}

void SnpDataset::validate() const {
    if (n_samples() < 2) throw std::runtime_error("dataset must have at least 2 samples");
    if (phenotype.size() != n_samples())
        throw std::runtime_error("phenotype length does not match sample count");
    if (labels.size() != n_snps())
        throw std::runtime_error("label count does not match SNP count");
    for (double v : phenotype)
        if (!std::isfinite(v)) throw std::runtime_error("phenotype contains a non-finite value");
    std::unordered_set<SnpLabel, SnpLabelHash> seen;
    seen.reserve(labels.size());
    for (const auto& l : labels)
        if (!seen.insert(l).second)
            throw std::runtime_error("duplicate SNP label " + to_string(l));
}

double minor_allele_frequency(std::span<const std::int8_t> column) {
    std::int64_t alt = 0, observed = 0;
    for (std::int8_t g : column) {
        if (g == kMissingGenotype) continue;
        alt += g;
        ++observed;
    }
    if (observed == 0) throw std::runtime_error("MAF undefined: column entirely missing");
    const double p = static_cast<double>(alt) / (2.0 * static_cast<double>(observed));
    return std::min(p, 1.0 - p);
}

SnpDataset qc_filter(const SnpDataset& ds, double max_missing, double min_maf, QcReport* report) {
    if (max_missing < 0.0 || max_missing >= 1.0)
        throw std::invalid_argument("qc_filter: max_missing must be in [0, 1)");
    if (min_maf < 0.0 || min_maf >= 0.5)
        throw std::invalid_argument("qc_filter: min_maf must be in [0, 0.5)");

    std::vector<int> kept;
    const auto n = static_cast<double>(ds.n_samples());
    for (std::size_t j = 0; j < ds.n_snps(); ++j) {
        auto col = ds.genotypes.col(j);
        std::int64_t missing = 0;
        std::int8_t first_seen = kMissingGenotype;
        bool varies = false;
        for (std::int8_t g : col) {
            if (g == kMissingGenotype) {
                ++missing;
                continue;
            }
            if (first_seen == kMissingGenotype)
                first_seen = g;
            else if (g != first_seen)
                varies = true;
        }
        std::string reason;
        if (!varies) {
            reason = "zero_variance";
        } else if (static_cast<double>(missing) / n >= max_missing) {
            reason = "missingness";
        } else if (minor_allele_frequency(col) <= min_maf) {
            reason = "maf";
        }
        if (reason.empty()) {
            kept.push_back(static_cast<int>(j));
        } else if (report) {
            report->removed.push_back({ds.labels[j], reason});
        }
    }
    if (kept.empty()) throw std::runtime_error("qc_filter removed every SNP");
    return subset_columns(ds, kept);
}

SnpDataset impute_mode(const SnpDataset& ds) {
    SnpDataset out = ds;
    for (std::size_t j = 0; j < out.n_snps(); ++j) {
        auto col = out.genotypes.col(j);
        std::array<std::int64_t, 3> counts{0, 0, 0};
        bool any_missing = false;
        for (std::int8_t g : col) {
            if (g == kMissingGenotype)
                any_missing = true;
            else
                ++counts[g];
        }
        if (!any_missing) continue;
        if (counts[0] + counts[1] + counts[2] == 0)
            throw std::runtime_error("impute_mode: column " + to_string(out.labels[j]) +
                                     " is entirely missing");
        std::int8_t mode = 0;
        for (std::int8_t g = 1; g < 3; ++g)
            if (counts[g] > counts[mode]) mode = g;  // ties keep the smaller code
        for (auto& g : col)
            if (g == kMissingGenotype) g = mode;
    }
    return out;
}

DataSplit split_dataset(const SnpDataset& ds, double fraction, std::uint64_t seed) {
    if (fraction <= 0.0 || fraction >= 1.0)
        throw std::invalid_argument("split fraction must be in (0, 1)");
    const std::size_t n = ds.n_samples();
    const auto n_train = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train == n)
        throw std::runtime_error("split fraction yields an empty half");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<std::size_t> train_rows(order.begin(), order.begin() + n_train);
    std::vector<std::size_t> validate_rows(order.begin() + n_train, order.end());
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(validate_rows.begin(), validate_rows.end());

    DataSplit split;
    split.split_fraction = fraction;
    split.train = subset_rows(ds, train_rows);
    split.validate = subset_rows(ds, validate_rows);
    return split;
}

BinIndex assign_bins(const SnpDataset& ds, int bin_size) {
    if (bin_size < 1) throw std::invalid_argument("bin_size must be >= 1");

    std::vector<int> order(ds.n_snps());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return ds.labels[a] < ds.labels[b]; });

    BinIndex index;
    index.bin_size = bin_size;
    index.bin_of_col.assign(ds.n_snps(), -1);

    std::size_t i = 0;
    while (i < order.size()) {
        const std::int32_t chrom = ds.labels[order[i]].chromosome;
        std::vector<int> current;
        while (i < order.size() && ds.labels[order[i]].chromosome == chrom) {
            current.push_back(order[i]);
            ++i;
            if (static_cast<int>(current.size()) == bin_size) {
                const BinId id = index.bin_count();
                for (int col : current) {
                    index.bin_of_col[col] = id;
                    index.bin_of.emplace(ds.labels[col], id);
                }
                index.bins.push_back(std::move(current));
                index.bin_chromosome.push_back(chrom);
                current.clear();
            }
        }
        if (!current.empty()) {
            const BinId id = index.bin_count();
            for (int col : current) {
                index.bin_of_col[col] = id;
                index.bin_of.emplace(ds.labels[col], id);
            }
            index.bins.push_back(std::move(current));
            index.bin_chromosome.push_back(chrom);
        }
    }
    return index;
}

SnpDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const char delim = csv::sniff_delimiter(line);
    const auto header = csv::split_line(line, delim);
    if (header.empty() || header[0] != "phenotype")
        throw std::runtime_error("dataset header must start with 'phenotype': " + path);

    SnpDataset ds;
    ds.labels.reserve(header.size() - 1);
    for (std::size_t j = 1; j < header.size(); ++j) {
        try {
            ds.labels.push_back(parse_snp_label(header[j]));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error("dataset column " + std::to_string(j) + ": " + e.what());
        }
    }

    std::vector<std::vector<std::int8_t>> row_genotypes;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = csv::split_line(line, delim);
        if (fields.size() != header.size())
            throw std::runtime_error("dataset line " + std::to_string(line_no) +
                                     ": expected " + std::to_string(header.size()) + " fields");
        char* end = nullptr;
        const double pheno = std::strtod(fields[0].c_str(), &end);
        if (end == fields[0].c_str() || *end != '\0' || !std::isfinite(pheno))
            throw std::runtime_error("dataset line " + std::to_string(line_no) +
                                     ": bad phenotype '" + fields[0] + "'");
        ds.phenotype.push_back(pheno);

        std::vector<std::int8_t> row(header.size() - 1);
        for (std::size_t j = 1; j < fields.size(); ++j) {
            const std::string& f = fields[j];
            if (f.empty() || f == "NA") {
                row[j - 1] = kMissingGenotype;
            } else if (f == "0" || f == "1" || f == "2") {
                row[j - 1] = static_cast<std::int8_t>(f[0] - '0');
            } else {
                throw std::runtime_error("dataset line " + std::to_string(line_no) + " column " +
                                         std::to_string(j) + ": bad genotype '" + f + "'");
            }
        }
        row_genotypes.push_back(std::move(row));
    }

    ds.genotypes = GenotypeMatrix(row_genotypes.size(), ds.labels.size());
    for (std::size_t i = 0; i < row_genotypes.size(); ++i)
        for (std::size_t j = 0; j < ds.labels.size(); ++j)
            ds.genotypes.set(i, j, row_genotypes[i][j]);

    ds.validate();
    return ds;
}

void save_dataset(const SnpDataset& ds, const std::string& path) {
    csv::Writer out(path);
    std::vector<std::string> header;
    header.reserve(ds.n_snps() + 1);
    header.emplace_back("phenotype");
    for (const auto& l : ds.labels) header.push_back(to_string(l));
    out.row(header);
    for (std::size_t i = 0; i < ds.n_samples(); ++i) {
        std::vector<std::string> row;
        row.reserve(ds.n_snps() + 1);
        row.push_back(csv::format_double(ds.phenotype[i]));
        for (std::size_t j = 0; j < ds.n_snps(); ++j) {
            const std::int8_t g = ds.genotypes.at(i, j);
            row.push_back(g == kMissingGenotype ? std::string("NA")
                                                : std::string(1, static_cast<char>('0' + g)));
        }
        out.row(row);
    }
}

void write_qc_report(const QcReport& report, const std::string& path) {
    csv::Writer out(path);
    out.row({"snp", "reason"});
    for (const auto& r : report.removed) out.row({to_string(r.snp), r.reason});
}

}  // namespace evoqtl
