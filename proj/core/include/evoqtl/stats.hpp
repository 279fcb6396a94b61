#pragma once

#include <span>
#include <vector>

namespace evoqtl::stats {

double mean(std::span<const double> v);
// Population variance (divide by n).
double variance(std::span<const double> v);
double pearson(std::span<const double> a, std::span<const double> b);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    bool degenerate = false;  // zero predictor variance
};

LinearFit ols_univariate(std::span<const double> x, std::span<const double> y);

// 1 - SS_res/SS_tot; SS_tot around mean(y). Throws if y has zero variance.
double r2_out_of_sample(std::span<const double> predicted, std::span<const double> y);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

// P(T > t) for Student's t with df degrees of freedom.
double student_t_sf(double t, double df);
double student_t_two_sided_p(double t, double df);

// Benjamini-Hochberg step-up adjusted p-values, same order as input.
std::vector<double> bh_adjust(std::span<const double> p);

}  // namespace evoqtl::stats
