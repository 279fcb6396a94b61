#include "evoqtl/snp_db.hpp"

#include <algorithm>

#include "evoqtl/csv.hpp"

namespace evoqtl {

namespace {
constexpr int kMaxAttempts = 20;
}

SnpDb::SnpDb(std::vector<SnpLabel> labels, BinIndex bins, bool flag_updates)
    : labels_(std::move(labels)), bins_(std::move(bins)), flag_updates_(flag_updates) {
    records_.resize(labels_.size());
    index_.reserve(labels_.size());
    for (std::size_t col = 0; col < labels_.size(); ++col) {
        records_[col].snp = labels_[col];
        records_[col].bin_id = bins_.bin_of_col[col];
        index_.emplace(labels_[col], static_cast<int>(col));

        const std::int32_t chrom = labels_[col].chromosome;
        auto [it, inserted] = chromosome_slot_.try_emplace(chrom, static_cast<int>(chromosome_cols_.size()));
        if (inserted) chromosome_cols_.emplace_back();
        chromosome_cols_[it->second].push_back(static_cast<int>(col));
    }
}

int SnpDb::col_of(const SnpLabel& label) const {
    auto it = index_.find(label);
    return it == index_.end() ? -1 : it->second;
}

void SnpDb::upsert_evaluation(int col, const EncodingResult& result) {
    SnpRecord& rec = records_[col];
    if (rec.evaluation.has_value()) return;  // write-once cache
    rec.evaluation = result;
    if (result.marginal_validation_r2 < 0.0 && flag_updates_ && rec.considered) {
        rec.considered = false;
        ++counters_.uninformative_flag_writes;
    }
}

void SnpDb::mark_pruned(std::span<const int> cols) {
    if (!flag_updates_) return;
    for (int col : cols) {
        if (records_[col].considered) {
            records_[col].considered = false;
            ++counters_.pruned_flag_writes;
        }
    }
}

std::vector<int> SnpDb::locality_candidates(int anchor_col, Locality locality) const {
    const SnpRecord& anchor = records_[anchor_col];
    std::vector<int> out;
    switch (locality) {
        case Locality::WithinBin:
            for (int col : bins_.bins[anchor.bin_id])
                if (records_[col].considered) out.push_back(col);
            break;
        case Locality::WithinChromosome: {
            const auto slot = chromosome_slot_.at(anchor.snp.chromosome);
            for (int col : chromosome_cols_[slot])
                if (records_[col].bin_id != anchor.bin_id && records_[col].considered)
                    out.push_back(col);
            break;
        }
        case Locality::OutsideChromosome:
            for (int col = 0; col < size(); ++col)
                if (labels_[col].chromosome != anchor.snp.chromosome && records_[col].considered)
                    out.push_back(col);
            break;
    }
    return out;
}

int SnpDb::try_random(std::span<const int> candidates, const std::vector<char>& exclude,
                      Rng& rng) const {
    if (candidates.empty()) return -1;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        const int col = candidates[rng.next_below(candidates.size())];
        if (!exclude[col]) return col;
    }
    return -1;
}

int SnpDb::try_smart(std::span<const int> candidates, const std::vector<char>& exclude,
                     Rng& rng) const {
    std::vector<int> cols;
    std::vector<double> weights;
    for (int col : candidates) {
        const auto& eval = records_[col].evaluation;
        if (!eval.has_value()) continue;
        if (!(eval->marginal_validation_r2 > 0.0)) continue;
        cols.push_back(col);
        weights.push_back(eval->marginal_validation_r2);
    }
    if (cols.empty()) return -1;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        const int col = cols[rng.weighted_index(weights)];
        if (!exclude[col]) return col;
    }
    return -1;
}

std::optional<int> SnpDb::recommend(int anchor_col, Locality locality, Strategy strategy,
                                    const std::vector<char>& exclude, Rng& rng) const {
    const auto candidates = locality_candidates(anchor_col, locality);

    if (strategy == Strategy::Smart) {
        ++counters_.smart_recommendations;
        const int col = try_smart(candidates, exclude, rng);
        if (col >= 0) return col;
        // smart exhausted its attempts: default to a random draw
    }
    ++counters_.random_recommendations;
    const int col = try_random(candidates, exclude, rng);
    if (col >= 0) return col;

    // Both strategies failed in this locality: uniform draw over every
    // considered SNP that the pipeline does not already hold.
    ++counters_.global_fallbacks;
    std::vector<int> pool;
    bool any_considered = false;
    for (int c = 0; c < size(); ++c) {
        if (!records_[c].considered) continue;
        any_considered = true;
        if (!exclude[c]) pool.push_back(c);
    }
    if (pool.empty()) {
        if (!any_considered)
            throw RecommendationExhausted("no considered SNP remains in the database");
        return std::nullopt;  // pipeline already holds every considered SNP
    }
    return pool[rng.next_below(pool.size())];
}

double SnpDb::coverage() const {
    if (records_.empty()) return 0.0;
    std::size_t evaluated = 0;
    for (const auto& rec : records_)
        if (rec.evaluation.has_value()) ++evaluated;
    return static_cast<double>(evaluated) / static_cast<double>(records_.size());
}

void SnpDb::dump(const std::string& path) const {
    csv::Writer out(path);
    out.row({"snp", "chromosome", "position", "bin_id", "marginal_r2", "encoding", "considered"});
    for (const auto& rec : records_) {
        std::string r2, encoding;
        if (rec.evaluation.has_value()) {
            r2 = csv::format_double(rec.evaluation->marginal_validation_r2);
            encoding = std::string(model_name(rec.evaluation->model));
        }
        out.row({to_string(rec.snp), csv::format_int(rec.snp.chromosome),
                 csv::format_int(rec.snp.position), csv::format_int(rec.bin_id), r2, encoding,
                 rec.considered ? "true" : "false"});
    }
}

}  // namespace evoqtl
