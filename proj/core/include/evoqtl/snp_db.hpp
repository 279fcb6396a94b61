#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "evoqtl/dataset.hpp"
#include "evoqtl/encoding.hpp"
#include "evoqtl/rng.hpp"

namespace evoqtl {

enum class Locality : std::uint8_t { WithinBin, WithinChromosome, OutsideChromosome };
enum class Strategy : std::uint8_t { Smart, Random };

struct SnpRecord {
    SnpLabel snp;
    std::optional<EncodingResult> evaluation;  // marginal r2 + encoding, write-once
    BinId bin_id = -1;
    bool considered = true;
};

struct RecommendationExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Per-SNP knowledge base: cached encoding evaluations, consideration flags
// and locality-aware recommendation. Reads may run concurrently; all writes
// happen at generation barriers.
class SnpDb {
public:
    SnpDb(std::vector<SnpLabel> labels, BinIndex bins, bool flag_updates = true);

    int size() const { return static_cast<int>(records_.size()); }
    const SnpRecord& record(int col) const { return records_[col]; }
    const BinIndex& bins() const { return bins_; }
    const std::vector<SnpLabel>& labels() const { return labels_; }

    int col_of(const SnpLabel& label) const;  // -1 if unknown

    bool has_evaluation(int col) const { return records_[col].evaluation.has_value(); }

    // Stores the evaluation once; later calls are no-ops. A negative marginal
    // r2 clears the consideration flag (unless flag updates are disabled).
    void upsert_evaluation(int col, const EncodingResult& result);

    void mark_pruned(std::span<const int> cols);

    // Returns a considered SNP outside `exclude` satisfying the locality.
    // Smart draws weight candidates by stored marginal r2 and fall back to
    // Random; Random falls back to a uniform draw over every considered SNP.
    // Each strategy gets up to 20 attempts. Throws RecommendationExhausted
    // when no considered SNP exists anywhere; yields nullopt when the only
    // considered SNPs left are already excluded.
    std::optional<int> recommend(int anchor_col, Locality locality, Strategy strategy,
                                 const std::vector<char>& exclude, Rng& rng) const;

    double coverage() const;  // fraction of records with a stored evaluation

    void dump(const std::string& path) const;

    struct Counters {
        std::uint64_t smart_recommendations = 0;
        std::uint64_t random_recommendations = 0;
        std::uint64_t global_fallbacks = 0;
        std::uint64_t pruned_flag_writes = 0;
        std::uint64_t uninformative_flag_writes = 0;
    };
    const Counters& counters() const { return counters_; }

private:
    std::vector<int> locality_candidates(int anchor_col, Locality locality) const;
    int try_random(std::span<const int> candidates, const std::vector<char>& exclude,
                   Rng& rng) const;
    int try_smart(std::span<const int> candidates, const std::vector<char>& exclude,
                  Rng& rng) const;

    std::vector<SnpLabel> labels_;
    std::vector<SnpRecord> records_;
    std::unordered_map<SnpLabel, int, SnpLabelHash> index_;
    BinIndex bins_;
    std::vector<std::vector<int>> chromosome_cols_;  // dense chromosome slot -> columns
    std::unordered_map<std::int32_t, int> chromosome_slot_;
    bool flag_updates_ = true;
    mutable Counters counters_;
};

}  // namespace evoqtl
