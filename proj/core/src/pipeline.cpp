#include "evoqtl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "evoqtl/stats.hpp"

namespace evoqtl {

LdParams LdParams::sample(Rng& rng) {
    LdParams params;
    params.r2_idx = static_cast<std::uint8_t>(rng.next_below(std::size(kLdR2Grid)));
    params.dmax_idx = static_cast<std::uint8_t>(rng.next_below(std::size(kLdDmaxGrid)));
    return params;
}

void LdParams::shift_param(Rng& rng) {
    const bool shift_r2 = rng.bernoulli(0.5);
    const int dir = rng.bernoulli(0.5) ? 1 : -1;
    if (shift_r2) {
        const auto size = std::size(kLdR2Grid);
        r2_idx = static_cast<std::uint8_t>((r2_idx + size + static_cast<std::size_t>(dir)) % size);
    } else {
        const auto size = std::size(kLdDmaxGrid);
        dmax_idx =
            static_cast<std::uint8_t>((dmax_idx + size + static_cast<std::size_t>(dir)) % size);
    }
}

std::vector<LdGroup> build_ld_groups(std::span<const int> snp_cols,
                                     const std::vector<SnpLabel>& labels, std::int64_t d_max) {
    std::vector<int> order(snp_cols.begin(), snp_cols.end());
    std::sort(order.begin(), order.end(), [&](int a, int b) { return labels[a] < labels[b]; });

    std::vector<LdGroup> groups;
    for (int col : order) {
        const SnpLabel& label = labels[col];
        if (!groups.empty() && groups.back().chromosome == label.chromosome &&
            label.position - labels[groups.back().members.back()].position <= d_max) {
            groups.back().members.push_back(col);
        } else {
            groups.push_back({label.chromosome, {col}});
        }
    }
    return groups;
}

namespace {

// Squared Pearson correlation between two genotype columns on additive codes.
double squared_correlation(std::span<const std::int8_t> a, std::span<const std::int8_t> b) {
    const auto n = static_cast<double>(a.size());
    double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sa += a[i];
        sb += b[i];
        sab += static_cast<double>(a[i]) * b[i];
        saa += static_cast<double>(a[i]) * a[i];
        sbb += static_cast<double>(b[i]) * b[i];
    }
    const double cov = sab - sa * sb / n;
    const double va = saa - sa * sa / n;
    const double vb = sbb - sb * sb / n;
    if (va <= 0.0 || vb <= 0.0) return 0.0;
    return cov * cov / (va * vb);
}

double stored_marginal_r2(const SnpDb& db, int col) {
    const auto& eval = db.record(col).evaluation;
    return eval.has_value() ? eval->marginal_validation_r2
                            : -std::numeric_limits<double>::infinity();
}

}  // namespace

std::vector<int> prune_pairwise(const LdGroup& group, const GenotypeMatrix& train_genotypes,
                                const SnpDb& db, double r2_threshold) {
    const auto& members = group.members;
    std::vector<char> alive(members.size(), 1);
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (!alive[i]) continue;
        for (std::size_t j = i + 1; j < members.size(); ++j) {
            if (!alive[i]) break;
            if (!alive[j]) continue;
            const double r2 = squared_correlation(train_genotypes.col(members[i]),
                                                  train_genotypes.col(members[j]));
            if (r2 <= r2_threshold) continue;
            const double ri = stored_marginal_r2(db, members[i]);
            const double rj = stored_marginal_r2(db, members[j]);
            alive[rj > ri ? i : j] = 0;
        }
    }
    std::vector<int> retained;
    for (std::size_t i = 0; i < members.size(); ++i)
        if (alive[i]) retained.push_back(members[i]);
    return retained;
}

std::vector<int> conditional_analysis(std::span<const int> retained, const DataSplit& split,
                                      const SnpDb& db, double alpha) {
    if (retained.size() <= 1) return {retained.begin(), retained.end()};

    int anchor = retained[0];
    for (int col : retained)
        if (stored_marginal_r2(db, col) > stored_marginal_r2(db, anchor)) anchor = col;

    const auto n = static_cast<Eigen::Index>(split.train.n_samples());
    const double df = static_cast<double>(n) - 3.0;
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = split.train.phenotype[i];

    std::vector<double> anchor_encoded(static_cast<std::size_t>(n));
    encode_column(split.train.genotypes.col(anchor), db.record(anchor).evaluation->codes(),
                  anchor_encoded);

    std::vector<int> tested;
    std::vector<double> p_values;
    std::vector<double> candidate_encoded(static_cast<std::size_t>(n));
    Eigen::MatrixXd design(n, 3);
    design.col(0).setOnes();
    for (Eigen::Index i = 0; i < n; ++i) design(i, 2) = anchor_encoded[i];

    for (int col : retained) {
        if (col == anchor) continue;
        encode_column(split.train.genotypes.col(col), db.record(col).evaluation->codes(),
                      candidate_encoded);
        for (Eigen::Index i = 0; i < n; ++i) design(i, 1) = candidate_encoded[i];

        const Eigen::Matrix3d gram = design.transpose() * design;
        const Eigen::FullPivLU<Eigen::Matrix3d> lu(gram);
        tested.push_back(col);
        if (!lu.isInvertible()) {
            // collinear with the anchor: no independent signal
            p_values.push_back(1.0);
            continue;
        }
        const Eigen::Matrix3d inv = lu.inverse();
        const Eigen::Vector3d beta = inv * (design.transpose() * y);
        const Eigen::VectorXd residual = y - design * beta;
        const double sigma2 = residual.squaredNorm() / df;
        const double se2 = sigma2 * inv(1, 1);
        double p;
        if (se2 > 0.0) {
            p = stats::student_t_two_sided_p(beta[1] / std::sqrt(se2), df);
        } else {
            p = beta[1] == 0.0 ? 1.0 : 0.0;  // exact fit
        }
        p_values.push_back(p);
    }

    const auto adjusted = stats::bh_adjust(p_values);
    std::vector<int> kept{anchor};
    for (std::size_t i = 0; i < tested.size(); ++i)
        if (adjusted[i] < alpha) kept.push_back(tested[i]);
    std::sort(kept.begin(), kept.end());
    return kept;
}

EvalResult evaluate_pipeline(const Pipeline& p, const DataSplit& split, const SnpDb& db,
                             const EvalOptions& options, EvalArtifacts* artifacts) {
    EvalResult result;

    std::vector<int> working;
    working.reserve(p.snps.size());
    for (int col : p.snps)
        if (db.record(col).considered) working.push_back(col);
    if (working.empty()) {
        result.fail_reason = "no_considered_snps";
        return result;
    }

    std::vector<int> kept;
    if (options.use_ld_node) {
        const auto groups = build_ld_groups(working, db.labels(), p.ld.d_max());
        result.ld_groups_processed = static_cast<int>(groups.size());
        for (const auto& group : groups) {
            const auto retained =
                prune_pairwise(group, split.train.genotypes, db, p.ld.r2_threshold());
            const auto final_set = conditional_analysis(retained, split, db, p.ld.alpha);
            kept.insert(kept.end(), final_set.begin(), final_set.end());
        }
        std::sort(kept.begin(), kept.end());
        std::set_difference(working.begin(), working.end(), kept.begin(), kept.end(),
                            std::back_inserter(result.pruned));
    } else {
        kept = working;
    }
    if (kept.empty()) {
        result.fail_reason = "ld_node_removed_all";
        return result;
    }

    const auto n_train = static_cast<Eigen::Index>(split.train.n_samples());
    const auto n_validate = static_cast<Eigen::Index>(split.validate.n_samples());
    Eigen::MatrixXd train_X(n_train, static_cast<Eigen::Index>(kept.size()));
    Eigen::MatrixXd validate_X(n_validate, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) {
        const CodeTriple codes = db.record(kept[j]).evaluation->codes();
        encode_column(
            split.train.genotypes.col(kept[j]), codes,
            {train_X.col(static_cast<Eigen::Index>(j)).data(), static_cast<std::size_t>(n_train)});
        encode_column(split.validate.genotypes.col(kept[j]), codes,
                      {validate_X.col(static_cast<Eigen::Index>(j)).data(),
                       static_cast<std::size_t>(n_validate)});
    }
    Eigen::VectorXd train_y(n_train), validate_y(n_validate);
    for (Eigen::Index i = 0; i < n_train; ++i) train_y[i] = split.train.phenotype[i];
    for (Eigen::Index i = 0; i < n_validate; ++i) validate_y[i] = split.validate.phenotype[i];

    Rng selector_rng(derive_seed(p.seed, 1));
    RawGenotypeView raw{&split.train.genotypes, kept};
    const auto selected = select_features(p.selector, train_X, train_y, raw, selector_rng);
    if (selected.empty()) {
        result.fail_reason = "empty_feature_selection";
        return result;
    }

    Eigen::MatrixXd train_sel(n_train, static_cast<Eigen::Index>(selected.size()));
    Eigen::MatrixXd validate_sel(n_validate, static_cast<Eigen::Index>(selected.size()));
    result.survivors.reserve(selected.size());
    for (std::size_t j = 0; j < selected.size(); ++j) {
        train_sel.col(static_cast<Eigen::Index>(j)) = train_X.col(selected[j]);
        validate_sel.col(static_cast<Eigen::Index>(j)) = validate_X.col(selected[j]);
        result.survivors.push_back(kept[selected[j]]);
    }

    Rng regressor_rng(derive_seed(p.seed, 2));
    FittedModel model = fit_regressor(p.regressor, train_sel, train_y, regressor_rng);
    result.r2 = r2_score(model, validate_sel, validate_y);
    result.complexity = static_cast<int>(result.survivors.size());
    result.failed = !(result.r2 >= 0.0);
    if (result.failed) result.fail_reason = "negative_r2";

    if (artifacts) {
        artifacts->model = std::move(model);
        artifacts->validate_matrix = std::move(validate_sel);
        artifacts->validate_phenotype = std::move(validate_y);
        artifacts->survivor_cols = result.survivors;
    }
    return result;
}

}  // namespace evoqtl
