#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "evoqtl/analysis.hpp"
#include "evoqtl/encoding.hpp"
#include "evoqtl/estimators.hpp"
#include "evoqtl/evolution.hpp"
#include "evoqtl/pipeline.hpp"
#include "evoqtl/rng.hpp"

using namespace evoqtl;

namespace {

std::vector<Evaluated> random_population(int n, Rng& rng) {
    std::vector<Evaluated> population;
    population.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Evaluated e;
        e.eval.failed = false;
        e.eval.r2 = rng.uniform();
        e.eval.complexity = 1 + static_cast<int>(rng.next_below(150));
        population.push_back(e);
    }
    return population;
}

Eigen::MatrixXd genotype_matrix(int n, int f, Rng& rng) {
    Eigen::MatrixXd X(n, f);
    const double levels[3] = {0.0, 0.5, 1.0};
    for (int j = 0; j < f; ++j)
        for (int i = 0; i < n; ++i) X(i, j) = levels[rng.next_below(3)];
    return X;
}

}  // namespace

static void BM_NondominatedSort(benchmark::State& state) {
    Rng rng(1);
    const auto population = random_population(static_cast<int>(state.range(0)), rng);
    for (auto _ : state) benchmark::DoNotOptimize(nondominated_sort(population));
}
BENCHMARK(BM_NondominatedSort)->Arg(150)->Arg(300);

static void BM_SurvivalSelect(benchmark::State& state) {
    Rng rng(2);
    const auto population = random_population(static_cast<int>(state.range(0)), rng);
    for (auto _ : state) {
        auto copy = population;
        benchmark::DoNotOptimize(survival_select(std::move(copy), 150));
    }
}
BENCHMARK(BM_SurvivalSelect)->Arg(300);

static void BM_TreeFit(benchmark::State& state) {
    Rng rng(3);
    const int n = 500, f = static_cast<int>(state.range(0));
    const auto X = genotype_matrix(n, f, rng);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = X(i, 0) + 0.5 * rng.normal();
    std::vector<double> target(y.data(), y.data() + n);
    std::vector<int> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    const FeatureLevels levels(X);
    TreeOptions opt;
    opt.max_depth = 8;
    for (auto _ : state) {
        RegressionTree tree;
        Rng fit_rng(7);
        tree.fit(levels, target, rows, opt, fit_rng);
        benchmark::DoNotOptimize(tree);
    }
}
BENCHMARK(BM_TreeFit)->Arg(50)->Arg(150);

static void BM_RandomForestFitPredict(benchmark::State& state) {
    Rng rng(4);
    const int n = 500, f = 50;
    const auto X = genotype_matrix(n, f, rng);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = X(i, 0) - X(i, 3) + rng.normal();
    RegressorSpec spec{RegressorKind::RandomForest, {2, 3, 0}};  // 200 trees, depth 8
    for (auto _ : state) {
        Rng fit_rng(9);
        const auto model = fit_regressor(spec, X, y, fit_rng);
        benchmark::DoNotOptimize(model.predict(X));
    }
}
BENCHMARK(BM_RandomForestFitPredict);

static void BM_MarginalR2AllEncodings(benchmark::State& state) {
    Rng rng(5);
    const int n = 500;
    std::vector<std::int8_t> gt(n), gv(n);
    std::vector<double> yt(n), yv(n);
    for (int i = 0; i < n; ++i) {
        gt[i] = static_cast<std::int8_t>(rng.next_below(3));
        gv[i] = static_cast<std::int8_t>(rng.next_below(3));
        yt[i] = 0.4 * gt[i] + rng.normal();
        yv[i] = 0.4 * gv[i] + rng.normal();
    }
    for (auto _ : state) benchmark::DoNotOptimize(select_optimal_encoding(gt, yt, gv, yv));
}
BENCHMARK(BM_MarginalR2AllEncodings);

static void BM_PairwisePrune(benchmark::State& state) {
    Rng rng(6);
    const int n = 500, members = static_cast<int>(state.range(0));
    SnpDataset ds;
    ds.phenotype.assign(n, 0.0);
    ds.genotypes = GenotypeMatrix(n, static_cast<std::size_t>(members));
    LdGroup group;
    group.chromosome = 1;
    for (int j = 0; j < members; ++j) {
        ds.labels.push_back({1, 1000 + 100L * j});
        group.members.push_back(j);
        for (int i = 0; i < n; ++i)
            ds.genotypes.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                             static_cast<std::int8_t>(rng.next_below(3)));
    }
    SnpDb db(ds.labels, assign_bins(ds, 500), true);
    for (int j = 0; j < members; ++j) {
        EncodingResult eval;
        eval.marginal_validation_r2 = rng.uniform() * 0.1;
        db.upsert_evaluation(j, eval);
    }
    for (auto _ : state)
        benchmark::DoNotOptimize(prune_pairwise(group, ds.genotypes, db, 0.8));
}
BENCHMARK(BM_PairwisePrune)->Arg(10)->Arg(50);

static void BM_Hypervolume(benchmark::State& state) {
    Rng rng(7);
    std::vector<std::pair<double, int>> front;
    for (int i = 0; i < 100; ++i)
        front.emplace_back(rng.uniform(), 1 + static_cast<int>(rng.next_below(150)));
    for (auto _ : state) benchmark::DoNotOptimize(hypervolume(front));
}
BENCHMARK(BM_Hypervolume);

BENCHMARK_MAIN();
