#include "ivgp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ivgp::stats {

double median(std::span<const double> samples)
{
    if (samples.empty()) {
        throw std::invalid_argument("median of an empty sample");
    }
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();
    if (n % 2 == 1) {
        return s[n / 2];
    }
    double a = s[n / 2 - 1];
    double b = s[n / 2];
    if (std::isinf(a) || std::isinf(b)) {
        return std::max(a, b);
    }
    return 0.5 * (a + b);
}

std::size_t binomial_quantile(std::size_t n, double p, double q)
{
    if (p <= 0.0) {
        return 0;
    }
    if (p >= 1.0) {
        return n;
    }
    const double nn = static_cast<double>(n);
    double cdf = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        double kk = static_cast<double>(k);
        double log_pmf = std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0) + kk * std::log(p)
            + (nn - kk) * std::log1p(-p);
        cdf += std::exp(log_pmf);
        // Relative slack absorbs summation round-off at exact CDF values.
        if (cdf >= q * (1.0 - 1e-12)) {
            return k;
        }
    }
    return n;
}

MedianCi median_ci95(std::span<const double> samples)
{
    if (samples.empty()) {
        throw std::invalid_argument("median_ci95: empty sample");
    }
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();

    MedianCi out;
    out.median = median(s);
    out.lo_rank = std::clamp<std::size_t>(binomial_quantile(n, 0.5, 0.025), 1, n);
    out.hi_rank = std::clamp<std::size_t>(binomial_quantile(n, 0.5, 0.975) + 1, 1, n);
    out.lo = s[out.lo_rank - 1];
    out.hi = s[out.hi_rank - 1];
    return out;
}

namespace {

    constexpr int kMaxIter = 1000;
    constexpr double kEps = 1e-15;

    // Series for the lower regularized gamma P(a, x), valid for x < a + 1.
    double gamma_p_series(double a, double x)
    {
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int n = 0; n < kMaxIter; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * kEps) {
                break;
            }
        }
        return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }

    // Lentz continued fraction for Q(a, x), valid for x >= a + 1.
    double gamma_q_fraction(double a, double x)
    {
        constexpr double tiny = std::numeric_limits<double>::min() / kEps;
        double b = x + 1.0 - a;
        double c = 1.0 / tiny;
        double d = 1.0 / b;
        double h = d;
        for (int i = 1; i < kMaxIter; ++i) {
            double an = -i * (i - a);
            b += 2.0;
            d = an * d + b;
            if (std::fabs(d) < tiny) {
                d = tiny;
            }
            c = b + an / c;
            if (std::fabs(c) < tiny) {
                c = tiny;
            }
            d = 1.0 / d;
            double del = d * c;
            h *= del;
            if (std::fabs(del - 1.0) < kEps) {
                break;
            }
        }
        return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }

} // namespace

double gamma_q(double a, double x)
{
    if (!(a > 0.0) || x < 0.0) {
        throw std::invalid_argument("gamma_q: need a > 0 and x >= 0");
    }
    if (x == 0.0) {
        return 1.0;
    }
    if (x < a + 1.0) {
        return 1.0 - gamma_p_series(a, x);
    }
    return gamma_q_fraction(a, x);
}

double chi2_survival(double chi2, double df)
{
    if (chi2 <= 0.0) {
        return 1.0;
    }
    return gamma_q(0.5 * df, 0.5 * chi2);
}

FriedmanResult friedman_rank_test(const std::vector<std::vector<double>>& values)
{
    const std::size_t blocks = values.size();
    if (blocks < 2) {
        throw std::invalid_argument("friedman_rank_test: need at least two blocks");
    }
    const std::size_t k = values.front().size();
    if (k < 2) {
        throw std::invalid_argument("friedman_rank_test: need at least two methods");
    }

    FriedmanResult out;
    out.rank_sums.assign(k, 0.0);
    std::vector<std::size_t> order(k);
    for (const auto& row : values) {
        if (row.size() != k) {
            throw std::invalid_argument("friedman_rank_test: ragged matrix");
        }
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return row[a] < row[b]; });
        // Runs of equal values share the mean of the ranks they span.
        for (std::size_t i = 0; i < k;) {
            std::size_t j = i;
            while (j + 1 < k && row[order[j + 1]] == row[order[i]]) {
                ++j;
            }
            double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t t = i; t <= j; ++t) {
                out.rank_sums[order[t]] += avg;
            }
            i = j + 1;
        }
    }

    const auto b = static_cast<double>(blocks);
    const auto kk = static_cast<double>(k);
    double sum_sq = 0.0;
    for (double r : out.rank_sums) {
        sum_sq += r * r;
    }
    out.chi2 = 12.0 / (b * kk * (kk + 1.0)) * sum_sq - 3.0 * b * (kk + 1.0);
    if (std::fabs(out.chi2) < 1e-12) {
        out.chi2 = 0.0;
    }
    out.df = k - 1;
    out.p = chi2_survival(out.chi2, static_cast<double>(out.df));
    return out;
}

} // namespace ivgp::stats
