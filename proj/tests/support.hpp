#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace test_support {

inline double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance_of(const std::vector<double>& v) {
    const double mu = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return s / static_cast<double>(v.size());
}

/// Wilson-Hilferty approximation of the chi-square 99th percentile; accurate
/// to a fraction of a percent for df >= 3, plenty for test thresholds.
inline double chi2_crit_99(int df) {
    const double z = 2.3263478740408408;  // Phi^{-1}(0.99)
    const double a = 2.0 / (9.0 * df);
    const double c = 1.0 - a + z * std::sqrt(a);
    return df * c * c * c;
}

/// Pearson chi-square statistic of observed counts against expected
/// probabilities (sum to ~1).
inline double chi2_stat(const std::vector<long>& counts, const std::vector<double>& probs,
                        long total) {
    double stat = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double expect = probs[i] * static_cast<double>(total);
        if (expect <= 0.0) continue;
        const double d = static_cast<double>(counts[i]) - expect;
        stat += d * d / expect;
    }
    return stat;
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Kolmogorov-Smirnov statistic of samples against a CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> samples, Cdf cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        worst = std::max(worst, std::abs(f - static_cast<double>(i) / n));
        worst = std::max(worst, std::abs(f - static_cast<double>(i + 1) / n));
    }
    return worst;
}

/// Simpson quadrature of f over [a, b] with n (even) panels.
template <typename F>
double simpson(F f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace test_support
