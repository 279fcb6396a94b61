#include <doctest.h>

#include <filesystem>
#include <set>

#include "evoqtl/csv.hpp"
#include "evoqtl/snp_db.hpp"
#include "support/fixtures.hpp"

using namespace evoqtl;

namespace {

// 3 chromosomes x 8 SNPs, bin size 4 -> two bins per chromosome.
SnpDataset grid_dataset() {
    std::vector<SnpLabel> labels;
    for (int chrom = 1; chrom <= 3; ++chrom)
        for (int k = 0; k < 8; ++k) labels.push_back({chrom, 1000 + 100L * k});
    std::vector<std::vector<std::int8_t>> cols(labels.size(), {0, 1, 2, 1});
    return fixtures::dataset(cols, {0.1, 0.2, 0.3, 0.4}, labels);
}

EncodingResult eval_of(double r2) {
    EncodingResult result;
    result.model = InheritanceModel::Additive;
    result.marginal_validation_r2 = r2;
    return result;
}

}  // namespace

TEST_CASE("upsert_evaluation caches write-once and flags uninformative SNPs") {
    auto ds = grid_dataset();
    auto db = fixtures::make_db(ds);

    db.upsert_evaluation(0, eval_of(0.05));
    CHECK(db.record(0).considered);
    CHECK(db.record(0).evaluation->marginal_validation_r2 == doctest::Approx(0.05));

    SUBCASE("negative r2 clears the flag") {
        db.upsert_evaluation(1, eval_of(-0.01));
        CHECK(!db.record(1).considered);
        CHECK(db.counters().uninformative_flag_writes == 1);
    }

    SUBCASE("second insert is a no-op") {
        db.upsert_evaluation(0, eval_of(0.99));
        CHECK(db.record(0).evaluation->marginal_validation_r2 == doctest::Approx(0.05));
    }

    SUBCASE("flag updates disabled keeps every SNP recommendable") {
        auto frozen = fixtures::make_db(ds, 4, /*flag_updates=*/false);
        frozen.upsert_evaluation(1, eval_of(-0.5));
        CHECK(frozen.record(1).considered);
        CHECK(frozen.counters().uninformative_flag_writes == 0);
        frozen.mark_pruned(std::vector<int>{2, 3});
        CHECK(frozen.record(2).considered);
        CHECK(frozen.counters().pruned_flag_writes == 0);
    }
}

TEST_CASE("mark_pruned is idempotent") {
    auto ds = grid_dataset();
    auto db = fixtures::make_db(ds);
    db.mark_pruned(std::vector<int>{4, 5});
    CHECK(!db.record(4).considered);
    CHECK(!db.record(5).considered);
    CHECK(db.counters().pruned_flag_writes == 2);
    db.mark_pruned(std::vector<int>{4});
    CHECK(db.counters().pruned_flag_writes == 2);  // already false
    db.mark_pruned(std::vector<int>{});
    CHECK(db.counters().pruned_flag_writes == 2);
}

TEST_CASE("recommendation respects locality, flags and the exclude set") {
    auto ds = grid_dataset();
    auto db = fixtures::make_db(ds);
    std::vector<char> exclude(static_cast<std::size_t>(db.size()), 0);
    Rng rng(7);

    SUBCASE("forced choice inside a bin") {
        // anchor col 0 (chrom 1, bin 0 = cols 0..3); exclude everything but col 2
        exclude[0] = exclude[1] = exclude[3] = 1;
        for (int trial = 0; trial < 10; ++trial) {
            const auto col = db.recommend(0, Locality::WithinBin, Strategy::Random, exclude, rng);
            REQUIRE(col.has_value());
            CHECK(*col == 2);
        }
    }

    SUBCASE("within chromosome excludes the anchor's bin") {
        for (int trial = 0; trial < 50; ++trial) {
            const auto col =
                db.recommend(0, Locality::WithinChromosome, Strategy::Random, exclude, rng);
            REQUIRE(col.has_value());
            CHECK(ds.labels[*col].chromosome == 1);
            CHECK(*col >= 4);  // bin 1 of chromosome 1
        }
    }

    SUBCASE("outside chromosome never returns the anchor's chromosome") {
        for (int trial = 0; trial < 50; ++trial) {
            const auto col =
                db.recommend(0, Locality::OutsideChromosome, Strategy::Random, exclude, rng);
            REQUIRE(col.has_value());
            CHECK(ds.labels[*col].chromosome != 1);
        }
    }

    SUBCASE("smart weights follow stored marginal r2") {
        // anchor col 16 (chromosome 3); candidates in its bin: cols 16..19
        db.upsert_evaluation(17, eval_of(0.09));
        db.upsert_evaluation(18, eval_of(0.01));
        exclude[16] = 1;
        int first = 0, second = 0;
        const int draws = 10000;
        for (int i = 0; i < draws; ++i) {
            const auto col = db.recommend(16, Locality::WithinBin, Strategy::Smart, exclude, rng);
            REQUIRE(col.has_value());
            if (*col == 17) ++first;
            if (*col == 18) ++second;
        }
        CHECK(first + second == draws);  // col 19 has no stored r2, never smart-eligible
        CHECK(static_cast<double>(first) / draws == doctest::Approx(0.9).epsilon(0.034));
    }

    SUBCASE("exhausted locality falls back to random then global") {
        // chromosome 3, second bin: flag everything outside anchor's bin off
        // except one SNP on chromosome 1
        std::vector<int> off;
        for (int col = 0; col < db.size(); ++col)
            if (col != 1 && !(col >= 20)) off.push_back(col);
        db.mark_pruned(off);
        // anchor col 20: within-chromosome locality (chrom 3 minus its bin) is
        // entirely pruned -> both strategies fail -> global fallback
        const auto col =
            db.recommend(20, Locality::WithinChromosome, Strategy::Smart, exclude, rng);
        REQUIRE(col.has_value());
        CHECK((*col == 1 || *col >= 20));
        CHECK(db.counters().global_fallbacks > 0);
    }

    SUBCASE("total exhaustion terminates") {
        std::vector<int> all(static_cast<std::size_t>(db.size()));
        for (int col = 0; col < db.size(); ++col) all[static_cast<std::size_t>(col)] = col;
        db.mark_pruned(all);
        CHECK_THROWS_AS(db.recommend(0, Locality::WithinBin, Strategy::Random, exclude, rng),
                        RecommendationExhausted);
    }

    SUBCASE("all considered SNPs excluded yields no recommendation") {
        std::fill(exclude.begin(), exclude.end(), 1);
        const auto col = db.recommend(0, Locality::WithinBin, Strategy::Random, exclude, rng);
        CHECK(!col.has_value());
    }
}

TEST_CASE("fuzzed recommendations never violate the flag or exclude contracts") {
    auto ds = grid_dataset();
    auto db = fixtures::make_db(ds);
    Rng rng(99);

    // random subset of stored evaluations, pruned flags and exclusions
    for (int col = 0; col < db.size(); ++col)
        if (rng.bernoulli(0.6)) db.upsert_evaluation(col, eval_of(0.001 + rng.uniform() * 0.1));
    std::vector<int> pruned;
    for (int col = 0; col < db.size(); ++col)
        if (rng.bernoulli(0.3)) pruned.push_back(col);
    db.mark_pruned(pruned);

    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<char> exclude(static_cast<std::size_t>(db.size()), 0);
        for (int col = 0; col < db.size(); ++col) exclude[col] = rng.bernoulli(0.4) ? 1 : 0;
        const int anchor = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(db.size())));
        const auto locality = static_cast<Locality>(rng.next_below(3));
        const auto strategy = rng.bernoulli(0.5) ? Strategy::Smart : Strategy::Random;
        const auto col = db.recommend(anchor, locality, strategy, exclude, rng);
        if (!col.has_value()) continue;
        CHECK(db.record(*col).considered);
        CHECK(!exclude[*col]);
    }
}

TEST_CASE("smart candidates never include non-positive marginal r2") {
    auto ds = grid_dataset();
    auto db = fixtures::make_db(ds, 4, /*flag_updates=*/false);  // keep flags true
    Rng rng(3);
    // only col 1 carries positive r2; col 2 carries negative r2 but stays
    // considered because flag updates are off
    db.upsert_evaluation(1, eval_of(0.2));
    db.upsert_evaluation(2, eval_of(-0.4));
    std::vector<char> exclude(static_cast<std::size_t>(db.size()), 0);
    exclude[0] = 1;
    for (int trial = 0; trial < 200; ++trial) {
        const auto col = db.recommend(0, Locality::WithinBin, Strategy::Smart, exclude, rng);
        REQUIRE(col.has_value());
        // the smart stage's only weighted candidate is col 1; the negative-r2
        // col 2 must never be drawn by it
        CHECK(*col == 1);
    }
}

TEST_CASE("coverage and dump reflect stored evaluations") {
    auto ds = grid_dataset();
    auto db = fixtures::make_db(ds);
    CHECK(db.coverage() == doctest::Approx(0.0));
    db.upsert_evaluation(0, eval_of(0.1));
    db.upsert_evaluation(5, eval_of(-0.1));
    CHECK(db.coverage() == doctest::Approx(2.0 / 24.0));

    const auto path = (std::filesystem::temp_directory_path() / "evoqtl_db.csv").string();
    db.dump(path);
    const auto table = csv::read_table(path);
    CHECK(table.header ==
          std::vector<std::string>{"snp", "chromosome", "position", "bin_id", "marginal_r2",
                                   "encoding", "considered"});
    CHECK(table.rows.size() == 24);
    CHECK(table.rows[0][0] == "1.1000");
    CHECK(table.rows[0][4] == "0.1");
    CHECK(table.rows[0][6] == "true");
    CHECK(table.rows[5][6] == "false");  // flagged by negative r2
    CHECK(table.rows[1][4].empty());     // no evaluation stored
}
