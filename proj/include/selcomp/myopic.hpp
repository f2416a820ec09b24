#pragma once
// Myopic policy: acts as if at most one more computation will be allowed.

#include <cstddef>
#include <limits>
#include <stdexcept>

#include "selcomp/bernoulli.hpp"
#include "selcomp/core.hpp"

namespace selcomp {

namespace detail {

// E[max(mu_i after one sample, lambda)] - c, for arm counts x and best other mean lambda.
inline double one_step_sample_value(const BetaCounts& x, double lambda, double cost) {
    const double p = predictive_success(x);
    const double up = posterior_mean({x.successes + 1, x.failures});
    const double down = posterior_mean({x.successes, x.failures + 1});
    return p * std::max(up, lambda) + (1.0 - p) * std::max(down, lambda) - cost;
}

}  // namespace detail

inline double myopic_q(const FlatState& s, MetaAction a, double cost) {
    const TopTwo top = top_two(s.means());
    if (a.is_stop()) return top.best;
    if (a.arm() >= s.k()) throw std::out_of_range("myopic_q: arm out of range");
    return detail::one_step_sample_value(s.arm(a.arm()), top.max_excluding(a.arm()), cost);
}

/// argmax over Stop and every Sample(i). Stop wins ties; among samples the
/// lowest index wins.
inline MetaAction myopic_policy(const FlatState& s, double cost) {
    const TopTwo top = top_two(s.means());
    double best_q = -std::numeric_limits<double>::infinity();
    std::size_t best_arm = 0;
    for (std::size_t i = 0; i < s.k(); ++i) {
        const double q = detail::one_step_sample_value(s.arm(i), top.max_excluding(i), cost);
        if (q > best_q + kTieTolerance) {
            best_q = q;
            best_arm = i;
        }
    }
    if (top.best >= best_q - kTieTolerance) return MetaAction::stop();
    return MetaAction::sample(best_arm);
}

}  // namespace selcomp
