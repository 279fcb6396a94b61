#include "evoqtl/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "evoqtl/parallel.hpp"

namespace evoqtl {

namespace {

constexpr std::uint64_t kStreamEvolve = 1;
constexpr std::uint64_t kStreamPipelineSeed = 2;

bool close_to(double a, double b) { return std::fabs(a - b) < 1e-9; }

}  // namespace

void EvolutionConfig::validate() const {
    if (population_size < 1) throw std::invalid_argument("population_size must be >= 1");
    if (generations < 0) throw std::invalid_argument("generations must be >= 0");
    if (min_snps < 1 || max_snps < min_snps)
        throw std::invalid_argument("need 1 <= min_snps <= max_snps");
    if (bin_size < 1) throw std::invalid_argument("bin_size must be >= 1");
    if (!close_to(p_crossover + p_mutation, 1.0))
        throw std::invalid_argument("crossover and mutation probabilities must sum to 1");
    if (!close_to(p_locality[0] + p_locality[1] + p_locality[2], 1.0))
        throw std::invalid_argument("locality probabilities must sum to 1");
    if (!close_to(p_smart + p_random, 1.0))
        throw std::invalid_argument("smart and random probabilities must sum to 1");
    if (p_node_tuning < 0.0 || p_node_tuning > 1.0)
        throw std::invalid_argument("node tuning probability must lie in [0, 1]");
}

bool dominates(const EvalResult& a, const EvalResult& b) {
    return a.r2 >= b.r2 && a.complexity <= b.complexity &&
           (a.r2 > b.r2 || a.complexity < b.complexity);
}

std::vector<std::vector<int>> nondominated_sort(std::span<const Evaluated> population) {
    const int n = static_cast<int>(population.size());
    std::vector<std::vector<int>> dominated(n);
    std::vector<int> domination_count(n, 0);

    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (dominates(population[i].eval, population[j].eval)) {
                dominated[i].push_back(j);
                ++domination_count[j];
            } else if (dominates(population[j].eval, population[i].eval)) {
                dominated[j].push_back(i);
                ++domination_count[i];
            }
        }
    }

    std::vector<std::vector<int>> fronts;
    std::vector<int> current;
    for (int i = 0; i < n; ++i)
        if (domination_count[i] == 0) current.push_back(i);
    while (!current.empty()) {
        fronts.push_back(current);
        std::vector<int> next;
        for (int i : current) {
            for (int j : dominated[i]) {
                if (--domination_count[j] == 0) next.push_back(j);
            }
        }
        std::sort(next.begin(), next.end());
        current = std::move(next);
    }
    return fronts;
}

std::vector<double> crowding_distance(std::span<const Evaluated> population,
                                      const std::vector<int>& front) {
    const std::size_t m = front.size();
    std::vector<double> distance(m, 0.0);
    if (m <= 2) {
        std::fill(distance.begin(), distance.end(), std::numeric_limits<double>::infinity());
        return distance;
    }

    auto sweep = [&](auto objective) {
        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return objective(population[front[a]].eval) < objective(population[front[b]].eval);
        });
        const double lo = objective(population[front[order.front()]].eval);
        const double hi = objective(population[front[order.back()]].eval);
        distance[order.front()] = std::numeric_limits<double>::infinity();
        distance[order.back()] = std::numeric_limits<double>::infinity();
        if (hi == lo) return;
        for (std::size_t k = 1; k + 1 < m; ++k) {
            const double below = objective(population[front[order[k - 1]]].eval);
            const double above = objective(population[front[order[k + 1]]].eval);
            distance[order[k]] += (above - below) / (hi - lo);
        }
    };
    sweep([](const EvalResult& e) { return e.r2; });
    sweep([](const EvalResult& e) { return static_cast<double>(e.complexity); });
    return distance;
}

Ranking rank_population(std::span<const Evaluated> population) {
    Ranking ranking;
    ranking.front_rank.assign(population.size(), 0);
    ranking.crowding.assign(population.size(), 0.0);
    const auto fronts = nondominated_sort(population);
    for (std::size_t rank = 0; rank < fronts.size(); ++rank) {
        const auto distance = crowding_distance(population, fronts[rank]);
        for (std::size_t k = 0; k < fronts[rank].size(); ++k) {
            ranking.front_rank[fronts[rank][k]] = static_cast<int>(rank);
            ranking.crowding[fronts[rank][k]] = distance[k];
        }
    }
    return ranking;
}

int tournament_compare(const Ranking& ranking, int a, int b, Rng& rng) {
    if (ranking.front_rank[a] != ranking.front_rank[b])
        return ranking.front_rank[a] < ranking.front_rank[b] ? a : b;
    if (ranking.crowding[a] != ranking.crowding[b])
        return ranking.crowding[a] > ranking.crowding[b] ? a : b;
    return rng.bernoulli(0.5) ? a : b;
}

int tournament_select(const Ranking& ranking, std::size_t pop_size, Rng& rng) {
    const auto a = static_cast<int>(rng.next_below(pop_size));
    const auto b = static_cast<int>(rng.next_below(pop_size));
    return tournament_compare(ranking, a, b, rng);
}

namespace {

std::vector<int> considered_survivors(const Evaluated& parent, const SnpDb& db) {
    std::vector<int> out;
    out.reserve(parent.eval.survivors.size());
    for (int col : parent.eval.survivors)
        if (db.record(col).considered) out.push_back(col);
    return out;
}

void tune_one_node(Pipeline& child, const EvolutionConfig& cfg, Rng& rng, OpLedger& ledger) {
    if (!rng.bernoulli(cfg.p_node_tuning)) return;
    ++ledger.node_tuning_ops;
    int node = static_cast<int>(rng.next_below(cfg.use_ld_node ? 3 : 2));
    if (!cfg.use_ld_node) ++node;  // LD slot absent
    switch (node) {
        case 0: child.ld.shift_param(rng); break;
        case 1: child.selector.shift_param(rng); break;
        default: child.regressor.shift_param(rng); break;
    }
}

void insert_sorted(std::vector<int>& snps, int col) {
    snps.insert(std::lower_bound(snps.begin(), snps.end(), col), col);
}

// SNP-node mutation: each drawn anchor asks the database for one extra SNP
// under a sampled locality and strategy.
void extend_with_recommendations(Pipeline& child, const std::vector<int>& anchors, const SnpDb& db,
                                 const EvolutionConfig& cfg, Rng& rng, OpLedger& ledger) {
    std::vector<char> exclude(static_cast<std::size_t>(db.size()), 0);
    for (int col : child.snps) exclude[col] = 1;

    const int count = rng.uniform_int(cfg.min_snps, cfg.max_snps);
    for (int k = 0; k < count; ++k) {
        if (static_cast<int>(child.snps.size()) >= cfg.max_snps) break;
        const int anchor = anchors[rng.next_below(anchors.size())];
        const double u = rng.uniform();
        const int locality = u < cfg.p_locality[0]            ? 0
                             : u < cfg.p_locality[0] + cfg.p_locality[1] ? 1
                                                                         : 2;
        ++ledger.locality_draws[locality];
        Strategy strategy = Strategy::Random;
        if (cfg.smart_enabled && rng.bernoulli(cfg.p_smart)) strategy = Strategy::Smart;
        const auto col =
            db.recommend(anchor, static_cast<Locality>(locality), strategy, exclude, rng);
        if (!col.has_value()) break;  // every considered SNP is already on board
        exclude[*col] = 1;
        insert_sorted(child.snps, *col);
    }
}

void apply_mutation_procedure(Pipeline& child, const std::vector<int>& anchors, const SnpDb& db,
                              const EvolutionConfig& cfg, Rng& rng, OpLedger& ledger) {
    tune_one_node(child, cfg, rng, ledger);
    extend_with_recommendations(child, anchors, db, cfg, rng, ledger);
}

// Weighted sample without replacement, weights = stored marginal r2.
std::vector<int> smart_sample(const std::vector<int>& pool, int count, const SnpDb& db, Rng& rng) {
    std::vector<int> cols = pool;
    std::vector<double> weights;
    weights.reserve(cols.size());
    double total = 0.0;
    for (int col : cols) {
        const auto& eval = db.record(col).evaluation;
        const double w = eval.has_value() ? std::max(eval->marginal_validation_r2, 0.0) : 0.0;
        weights.push_back(w);
        total += w;
    }
    std::vector<int> chosen;
    chosen.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        std::size_t idx;
        if (total > 0.0) {
            idx = rng.weighted_index(weights);
        } else {
            idx = static_cast<std::size_t>(rng.next_below(cols.size()));
        }
        chosen.push_back(cols[idx]);
        total -= weights[idx];
        if (total < 0.0) total = 0.0;
        cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(idx));
        weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(idx));
    }
    return chosen;
}

std::vector<int> uniform_sample(std::vector<int> pool, int count, Rng& rng) {
    for (int i = 0; i < count; ++i) {
        const auto j = i + static_cast<int>(rng.next_below(pool.size() - static_cast<std::size_t>(i)));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(count));
    return pool;
}

}  // namespace

std::optional<Pipeline> offspring_mutation(const Evaluated& parent, const SnpDb& db,
                                           const EvolutionConfig& cfg, Rng& rng,
                                           OpLedger& ledger) {
    ++ledger.mutation_ops;
    std::vector<int> inherited = considered_survivors(parent, db);
    if (inherited.empty()) return std::nullopt;

    Pipeline child;
    child.ld = parent.pipeline.ld;
    child.selector = parent.pipeline.selector;
    child.regressor = parent.pipeline.regressor;
    child.snps = inherited;
    apply_mutation_procedure(child, inherited, db, cfg, rng, ledger);
    return child;
}

std::optional<Pipeline> offspring_crossover(const Evaluated& pa, const Evaluated& pb,
                                            const SnpDb& db, const EvolutionConfig& cfg, Rng& rng,
                                            OpLedger& ledger) {
    ++ledger.crossover_ops;
    const auto sa = considered_survivors(pa, db);
    const auto sb = considered_survivors(pb, db);
    std::vector<int> inheritable;
    inheritable.reserve(sa.size() + sb.size());
    std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(inheritable));
    if (inheritable.empty()) return std::nullopt;

    Pipeline child;
    child.ld = rng.bernoulli(0.5) ? pa.pipeline.ld : pb.pipeline.ld;
    child.selector = rng.bernoulli(0.5) ? pa.pipeline.selector : pb.pipeline.selector;
    child.regressor = rng.bernoulli(0.5) ? pa.pipeline.regressor : pb.pipeline.regressor;

    const int count = rng.uniform_int(cfg.min_snps, cfg.max_snps);
    if (static_cast<int>(inheritable.size()) <= count) {
        child.snps = inheritable;
    } else if (cfg.smart_enabled && rng.bernoulli(cfg.p_smart)) {
        child.snps = smart_sample(inheritable, count, db, rng);
        std::sort(child.snps.begin(), child.snps.end());
    } else {
        child.snps = uniform_sample(inheritable, count, rng);
        std::sort(child.snps.begin(), child.snps.end());
    }

    if (rng.bernoulli(cfg.p_mutation)) {
        // every SNP of the child is anchor-eligible here
        const std::vector<int> anchors = child.snps;
        apply_mutation_procedure(child, anchors, db, cfg, rng, ledger);
    }
    return child;
}

namespace {

std::uint64_t hash_survivors(const std::vector<int>& survivors) {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (int col : survivors) h = splitmix64(h ^ static_cast<std::uint64_t>(col));
    return h;
}

}  // namespace

std::vector<Evaluated> dedup_offspring(std::vector<Evaluated> offspring, Rng& rng) {
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> groups;
    std::vector<std::uint64_t> group_order;
    for (std::size_t i = 0; i < offspring.size(); ++i) {
        const std::uint64_t key = hash_survivors(offspring[i].eval.survivors);
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) group_order.push_back(key);
        it->second.push_back(i);
    }

    std::vector<char> keep(offspring.size(), 0);
    for (std::uint64_t key : group_order) {
        auto& members = groups[key];
        // hash collisions are resolved by exact survivor comparison
        std::vector<std::vector<std::size_t>> exact;
        for (std::size_t idx : members) {
            bool placed = false;
            for (auto& bucket : exact) {
                if (offspring[bucket.front()].eval.survivors == offspring[idx].eval.survivors) {
                    bucket.push_back(idx);
                    placed = true;
                    break;
                }
            }
            if (!placed) exact.push_back({idx});
        }
        for (auto& bucket : exact)
            keep[bucket[rng.next_below(bucket.size())]] = 1;
    }

    std::vector<Evaluated> result;
    result.reserve(offspring.size());
    for (std::size_t i = 0; i < offspring.size(); ++i)
        if (keep[i]) result.push_back(std::move(offspring[i]));
    return result;
}

std::vector<Evaluated> survival_select(std::vector<Evaluated> offspring, int size) {
    if (static_cast<int>(offspring.size()) <= size) return offspring;

    const auto fronts = nondominated_sort(offspring);
    std::vector<int> selected;
    selected.reserve(static_cast<std::size_t>(size));
    for (const auto& front : fronts) {
        if (static_cast<int>(selected.size() + front.size()) <= size) {
            selected.insert(selected.end(), front.begin(), front.end());
            if (static_cast<int>(selected.size()) == size) break;
            continue;
        }
        const auto distance = crowding_distance(offspring, front);
        std::vector<std::size_t> order(front.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return distance[a] > distance[b]; });
        const auto needed = static_cast<std::size_t>(size) - selected.size();
        for (std::size_t k = 0; k < needed; ++k) selected.push_back(front[order[k]]);
        break;
    }

    std::sort(selected.begin(), selected.end());
    std::vector<Evaluated> result;
    result.reserve(selected.size());
    for (int idx : selected) result.push_back(std::move(offspring[idx]));
    return result;
}

Pipeline random_pipeline(const SnpDb& db, int n_snps, Rng& rng) {
    const auto total = static_cast<std::size_t>(db.size());
    if (static_cast<std::size_t>(n_snps) > total)
        throw std::invalid_argument("random_pipeline: dataset has fewer SNPs than requested");

    Pipeline p;
    if (static_cast<std::size_t>(n_snps) * 2 > total) {
        std::vector<int> pool(total);
        std::iota(pool.begin(), pool.end(), 0);
        p.snps = uniform_sample(std::move(pool), n_snps, rng);
    } else {
        std::unordered_set<int> chosen;
        chosen.reserve(static_cast<std::size_t>(n_snps) * 2);
        while (chosen.size() < static_cast<std::size_t>(n_snps))
            chosen.insert(static_cast<int>(rng.next_below(total)));
        p.snps.assign(chosen.begin(), chosen.end());
    }
    std::sort(p.snps.begin(), p.snps.end());
    p.ld = LdParams::sample(rng);
    p.selector = SelectorSpec::sample(rng);
    p.regressor = RegressorSpec::sample(rng);
    return p;
}

void process_snps(std::span<const Pipeline> pipelines, const DataSplit& split, SnpDb& db,
                  int workers) {
    std::vector<char> seen(static_cast<std::size_t>(db.size()), 0);
    std::vector<int> pending;
    for (const auto& p : pipelines) {
        for (int col : p.snps) {
            if (!seen[col] && !db.has_evaluation(col)) {
                seen[col] = 1;
                pending.push_back(col);
            }
        }
    }
    std::sort(pending.begin(), pending.end());

    std::vector<EncodingResult> results(pending.size());
    parallel_for(pending.size(), workers,
                 [&](std::size_t i) { results[i] = select_optimal_encoding(split, pending[i]); });
    for (std::size_t i = 0; i < pending.size(); ++i) db.upsert_evaluation(pending[i], results[i]);
}

std::vector<EvalResult> evaluate_all(std::span<const Pipeline> pipelines, const DataSplit& split,
                                     const SnpDb& db, const EvalOptions& options, int workers) {
    std::vector<EvalResult> results(pipelines.size());
    parallel_for(pipelines.size(), workers, [&](std::size_t i) {
        results[i] = evaluate_pipeline(pipelines[i], split, db, options);
    });
    return results;
}

namespace {

GenerationStats make_stats(int generation, std::uint64_t evaluations,
                           std::span<const Evaluated> population) {
    GenerationStats stats;
    stats.generation = generation;
    stats.evaluations = evaluations;
    stats.front0_size = static_cast<int>(nondominated_sort(population).front().size());
    double best_r2 = -std::numeric_limits<double>::infinity();
    int best_complexity = 0;
    for (const auto& member : population) {
        if (member.eval.r2 > best_r2) {
            best_r2 = member.eval.r2;
            best_complexity = member.eval.complexity;
        } else if (member.eval.r2 == best_r2) {
            best_complexity = std::min(best_complexity, member.eval.complexity);
        }
    }
    stats.best_r2 = best_r2;
    stats.best_complexity = best_complexity;
    return stats;
}

}  // namespace

EvolveResult evolve(const EvolutionConfig& cfg, const DataSplit& split, SnpDb& db) {
    cfg.validate();
    EvolveResult out;
    OpLedger& ledger = out.ledger;
    Rng rng(derive_seed(cfg.seed, kStreamEvolve));

    const auto size = static_cast<std::size_t>(cfg.population_size);
    const EvalOptions eval_options{cfg.use_ld_node};

    std::vector<Pipeline> pipelines;
    pipelines.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        Pipeline p = random_pipeline(db, cfg.max_snps, rng);
        p.ld.alpha = cfg.ld_alpha;
        p.seed = derive_seed(derive_seed(cfg.seed, kStreamPipelineSeed, 0), 0, i);
        pipelines.push_back(std::move(p));
    }

    process_snps(pipelines, split, db, cfg.workers);
    auto results = evaluate_all(pipelines, split, db, eval_options, cfg.workers);
    ledger.evaluations += pipelines.size();
    std::vector<Evaluated> population;
    for (std::size_t i = 0; i < pipelines.size(); ++i) {
        ledger.ld_groups_processed += static_cast<std::uint64_t>(results[i].ld_groups_processed);
        db.mark_pruned(results[i].pruned);
        if (results[i].failed) {
            ++ledger.failed_evaluations;
        } else {
            population.push_back({std::move(pipelines[i]), std::move(results[i])});
        }
    }
    if (population.empty())
        throw EvolveAborted("every pipeline in the initial population failed evaluation");
    out.history.push_back(make_stats(0, ledger.evaluations, population));

    for (int gen = 1; gen <= cfg.generations; ++gen) {
        const Ranking ranking = rank_population(population);
        const std::size_t offspring_target = 2 * size;

        std::vector<Pipeline> constructed;
        constructed.reserve(offspring_target);
        for (std::size_t idx = 0; idx < offspring_target; ++idx) {
            std::optional<Pipeline> child;
            if (rng.bernoulli(cfg.p_crossover)) {
                const int a = tournament_select(ranking, population.size(), rng);
                const int b = tournament_select(ranking, population.size(), rng);
                child = offspring_crossover(population[a], population[b], db, cfg, rng, ledger);
            } else {
                const int a = tournament_select(ranking, population.size(), rng);
                child = offspring_mutation(population[a], db, cfg, rng, ledger);
            }
            if (child.has_value()) {
                child->seed = derive_seed(derive_seed(cfg.seed, kStreamPipelineSeed,
                                                      static_cast<std::uint64_t>(gen)),
                                          0, idx);
                constructed.push_back(std::move(*child));
            } else {
                ++ledger.construction_failures;
                ++ledger.failed_evaluations;
            }
        }

        process_snps(constructed, split, db, cfg.workers);
        results = evaluate_all(constructed, split, db, eval_options, cfg.workers);
        ledger.evaluations += offspring_target;  // failed constructions count too

        std::vector<Evaluated> offspring;
        offspring.reserve(constructed.size());
        for (std::size_t i = 0; i < constructed.size(); ++i) {
            ledger.ld_groups_processed +=
                static_cast<std::uint64_t>(results[i].ld_groups_processed);
            db.mark_pruned(results[i].pruned);
            if (results[i].failed) {
                ++ledger.failed_evaluations;
            } else {
                offspring.push_back({std::move(constructed[i]), std::move(results[i])});
            }
        }

        auto deduped = dedup_offspring(std::move(offspring), rng);
        population = survival_select(std::move(deduped), cfg.population_size);
        if (population.empty())
            throw EvolveAborted("generation " + std::to_string(gen) +
                                ": no offspring survived evaluation");
        out.history.push_back(make_stats(gen, ledger.evaluations, population));
    }

    out.population = std::move(population);
    return out;
}

}  // namespace evoqtl
