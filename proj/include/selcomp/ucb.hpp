#pragma once
// UCB1 arm choice, alone and gated by the Bayesian stopping rules
// (UCB1-b: myopic stopping test, UCB1-B: blinkered stopping test).

#include <cmath>
#include <cstddef>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "selcomp/arm_stats.hpp"
#include "selcomp/bernoulli.hpp"
#include "selcomp/blinkered.hpp"
#include "selcomp/myopic.hpp"

namespace selcomp {

inline constexpr double kUcb1Exploration = 1.4142135623730951;  // sqrt(2)

/// argmax_i mean_i + exploration * sqrt(ln t / n_i). Unsampled arms come
/// first (lowest index); ties go to the lowest index.
inline std::size_t ucb1_choose(std::span<const ArmStats> stats, std::uint64_t t,
                               double exploration = kUcb1Exploration) {
    if (stats.empty()) throw std::invalid_argument("ucb1_choose: no arms");
    for (std::size_t i = 0; i < stats.size(); ++i)
        if (stats[i].n() == 0) return i;
    const double log_t = std::log(static_cast<double>(std::max<std::uint64_t>(t, 1)));
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < stats.size(); ++i) {
        const double score =
            stats[i].mean() + exploration * std::sqrt(log_t / static_cast<double>(stats[i].n()));
        if (score > best_score) {
            best_score = score;
            best = i;
        }
    }
    return best;
}

/// Sample-mean statistics of the observed part of a flat state. Counts are
/// taken as observations, so this assumes no pseudo-count seeding.
inline std::vector<ArmStats> observed_stats(const FlatState& s) {
    std::vector<ArmStats> out(s.k());
    for (std::size_t i = 0; i < s.k(); ++i) {
        const auto& a = s.arm(i);
        if (a.n() > 0) out[i] = ArmStats::from_mean(a.n(), static_cast<double>(a.successes) / static_cast<double>(a.n()));
    }
    return out;
}

enum class StopRule { Myopic, Blinkered };

/// UCB1-b (Myopic) or UCB1-B (Blinkered): stop when the Bayesian rule says
/// so, otherwise sample the UCB1 arm. `index` is required for Blinkered.
inline MetaAction ucb1_stopping_variant(const FlatState& s, double cost, StopRule rule,
                                        const BlinkeredIndex* index = nullptr,
                                        double exploration = kUcb1Exploration) {
    bool stop = false;
    if (rule == StopRule::Myopic) {
        stop = myopic_policy(s, cost).is_stop();
    } else {
        if (!index) throw std::invalid_argument("ucb1_stopping_variant: blinkered rule needs an index");
        stop = blinkered_policy(*index, s).is_stop();
    }
    if (stop) return MetaAction::stop();
    const auto stats = observed_stats(s);
    std::uint64_t t = 0;
    for (const auto& a : stats) t += a.n();
    return MetaAction::sample(ucb1_choose(stats, t, exploration));
}

}  // namespace selcomp
