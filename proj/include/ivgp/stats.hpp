#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ivgp::stats {

struct MedianCi {
    double median = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t lo_rank = 0; // 1-based order statistics bounding the interval
    std::size_t hi_rank = 0;
};

// Median with a distribution-free 95% interval from binomial(n, 1/2) order
// statistics. Infinite entries (invalid results) sort above all finite ones.
MedianCi median_ci95(std::span<const double> samples);

double median(std::span<const double> samples);

// Smallest k with P(X <= k) >= q for X ~ binomial(n, p).
std::size_t binomial_quantile(std::size_t n, double p, double q);

// Regularized upper incomplete gamma function Q(a, x).
double gamma_q(double a, double x);

double chi2_survival(double chi2, double df);

struct FriedmanResult {
    double chi2 = 0.0;
    std::size_t df = 0;
    double p = 1.0;
    std::vector<double> rank_sums;
};

// `values[b][j]` is method j's score in block b; lower scores rank first.
// Ties receive average ranks.
FriedmanResult friedman_rank_test(const std::vector<std::vector<double>>& values);

} // namespace ivgp::stats
