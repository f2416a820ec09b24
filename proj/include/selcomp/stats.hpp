#pragma once
// Small summary-statistics helpers shared by the evaluators and harnesses.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace selcomp {

struct MeanEstimate {
    double mean = 0.0;
    std::optional<double> se;  // absent for a single observation
    std::size_t count = 0;
};

/// Mean and standard error of the mean; values are summed in index order.
inline MeanEstimate estimate_mean(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("estimate_mean: no observations");
    MeanEstimate out;
    out.count = xs.size();
    double sum = 0.0;
    for (double x : xs) sum += x;
    out.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        const double var = ss / static_cast<double>(xs.size() - 1);
        out.se = std::sqrt(var / static_cast<double>(xs.size()));
    }
    return out;
}

/// Paired difference a[i] - b[i].
inline MeanEstimate paired_difference(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("paired_difference: size mismatch");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return estimate_mean(d);
}

// One-sided 95% normal quantile.
inline constexpr double kZ95OneSided = 1.6448536269514722;
// Two-sided 95% normal quantile.
inline constexpr double kZ95TwoSided = 1.959963984540054;

/// Upper one-sided 95% confidence bound of a mean estimate.
inline double upper_bound_95(const MeanEstimate& e) {
    return e.mean + kZ95OneSided * e.se.value_or(0.0);
}

/// Wilson score interval for a binomial proportion.
inline std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials,
                                                 double z = kZ95TwoSided) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

}  // namespace selcomp
