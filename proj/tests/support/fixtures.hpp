#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "evoqtl/dataset.hpp"
#include "evoqtl/snp_db.hpp"

namespace fixtures {

// Builds a dataset from genotype columns (one vector per SNP).
inline evoqtl::SnpDataset dataset(std::vector<std::vector<std::int8_t>> columns,
                                  std::vector<double> phenotype,
                                  std::vector<evoqtl::SnpLabel> labels = {}) {
    evoqtl::SnpDataset ds;
    const std::size_t n = phenotype.size();
    ds.phenotype = std::move(phenotype);
    ds.genotypes = evoqtl::GenotypeMatrix(n, columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j)
        for (std::size_t i = 0; i < n; ++i) ds.genotypes.set(i, j, columns[j][i]);
    if (labels.empty()) {
        for (std::size_t j = 0; j < columns.size(); ++j)
            labels.push_back({1, static_cast<std::int64_t>(1000 + j)});
    }
    ds.labels = std::move(labels);
    return ds;
}

// A split whose halves are given explicitly (same labels both sides).
inline evoqtl::DataSplit split(evoqtl::SnpDataset train, evoqtl::SnpDataset validate) {
    evoqtl::DataSplit s;
    s.train = std::move(train);
    s.validate = std::move(validate);
    s.split_fraction = 0.5;
    return s;
}

inline evoqtl::SnpDb make_db(const evoqtl::SnpDataset& ds, int bin_size = 4,
                             bool flag_updates = true) {
    return evoqtl::SnpDb(ds.labels, evoqtl::assign_bins(ds, bin_size), flag_updates);
}

}  // namespace fixtures
