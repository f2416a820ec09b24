#pragma once
// Distribution-free upper bounds on the value of information of sampling an
// arm N more times, built from sample means alone (any rewards in [0, 1]).
//
// alpha is the arm with the highest sample mean and beta the runner-up.
// Testing alpha only helps if its mean falls below beta's; testing any other
// arm i only helps if its mean rises above alpha's. Hoeffding's inequality
// bounds both crossing probabilities, giving the VOI bound ("VOI") and an
// erf-integrated refinement ("VOI+").

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "selcomp/arm_stats.hpp"
#include "selcomp/bernoulli.hpp"

namespace selcomp {

/// Exponent constant of the crossing-probability bound, 8(sqrt(2) - 1)^2.
inline constexpr double kVoiPhi = 8.0 * (std::numbers::sqrt2 - 1.0) * (std::numbers::sqrt2 - 1.0);

enum class VoiVariant { Hoeffding, Erf };

inline const char* to_string(VoiVariant v) { return v == VoiVariant::Hoeffding ? "VOI" : "VOI+"; }

class VoiContext {
public:
    /// `horizon` is N, the number of further samples the bound accounts for.
    VoiContext(std::span<const ArmStats> stats, std::uint64_t horizon) : stats_(stats), horizon_(horizon) {
        if (stats_.empty()) throw std::invalid_argument("VoiContext: no arms");
        for (std::size_t i = 0; i < stats_.size(); ++i)
            if (stats_[i].n() == 0)
                throw std::invalid_argument("VoiContext: arm " + std::to_string(i) + " has no samples");
        alpha_ = 0;
        for (std::size_t i = 1; i < stats_.size(); ++i)
            if (stats_[i].mean() > stats_[alpha_].mean()) alpha_ = i;
        beta_ = alpha_;
        for (std::size_t i = 0; i < stats_.size(); ++i) {
            if (i == alpha_) continue;
            if (beta_ == alpha_ || stats_[i].mean() > stats_[beta_].mean()) beta_ = i;
        }
    }

    std::size_t k() const { return stats_.size(); }
    std::size_t alpha() const { return alpha_; }
    // Equal to alpha() when there is a single arm.
    std::size_t beta() const { return beta_; }
    bool has_competitor() const { return beta_ != alpha_; }
    std::uint64_t horizon() const { return horizon_; }
    const ArmStats& stats(std::size_t i) const { return stats_[i]; }
    double mean(std::size_t i) const { return stats_[i].mean(); }
    double n(std::size_t i) const { return static_cast<double>(stats_[i].n()); }

private:
    std::span<const ArmStats> stats_;
    std::uint64_t horizon_;
    std::size_t alpha_ = 0;
    std::size_t beta_ = 0;
};

namespace detail {

inline void check_arm(const VoiContext& ctx, std::size_t arm) {
    if (arm >= ctx.k()) throw std::out_of_range("voi: arm out of range");
}

// Mean gap that must be crossed by `arm` and the gain factor applied to it.
inline double crossing_gap(const VoiContext& ctx, std::size_t arm) {
    return arm == ctx.alpha() ? ctx.mean(ctx.alpha()) - ctx.mean(ctx.beta())
                              : ctx.mean(ctx.alpha()) - ctx.mean(arm);
}

inline double gain_factor(const VoiContext& ctx, std::size_t arm) {
    return arm == ctx.alpha() ? ctx.mean(ctx.beta()) : 1.0 - ctx.mean(ctx.alpha());
}

}  // namespace detail

/// Hoeffding bound on the probability that `arm`'s mean crosses the decision
/// threshold after more samples: 2 exp(-phi gap^2 n).
inline double crossing_probability_bound(const VoiContext& ctx, std::size_t arm) {
    detail::check_arm(ctx, arm);
    const double gap = detail::crossing_gap(ctx, arm);
    return 2.0 * std::exp(-kVoiPhi * gap * gap * ctx.n(arm));
}

/// VOI bound: (N gain / n) * 2 exp(-phi gap^2 n), where gain is beta's mean
/// for alpha and (1 - alpha's mean) otherwise.
inline double voi_bound_hoeffding(const VoiContext& ctx, std::size_t arm) {
    detail::check_arm(ctx, arm);
    if (!ctx.has_competitor()) return 0.0;
    return static_cast<double>(ctx.horizon()) * detail::gain_factor(ctx, arm) / ctx.n(arm) *
           crossing_probability_bound(ctx, arm);
}

/// VOI+ bound: N sqrt(pi) / (n sqrt(n)) [erf(a sqrt(n/pi)) - erf(gap sqrt(n/pi))]
/// with a = alpha's mean for alpha and (1 - mean_i) for other arms.
inline double voi_bound_erf(const VoiContext& ctx, std::size_t arm) {
    detail::check_arm(ctx, arm);
    if (!ctx.has_competitor()) return 0.0;
    const double n = ctx.n(arm);
    const double scale = std::sqrt(n) / std::sqrt(std::numbers::pi);
    const double upper = arm == ctx.alpha() ? ctx.mean(arm) : 1.0 - ctx.mean(arm);
    const double gap = detail::crossing_gap(ctx, arm);
    const double diff = std::erf(upper * scale) - std::erf(gap * scale);
    return static_cast<double>(ctx.horizon()) * std::sqrt(std::numbers::pi) / (n * std::sqrt(n)) *
           std::max(0.0, diff);
}

inline double voi_bound(const VoiContext& ctx, std::size_t arm, VoiVariant v) {
    return v == VoiVariant::Hoeffding ? voi_bound_hoeffding(ctx, arm) : voi_bound_erf(ctx, arm);
}

/// Arm with the largest VOI bound; lowest index on ties.
inline std::size_t voi_select(const VoiContext& ctx, VoiVariant v) {
    std::size_t best = 0;
    double best_bound = voi_bound(ctx, 0, v);
    for (std::size_t i = 1; i < ctx.k(); ++i) {
        const double b = voi_bound(ctx, i, v);
        if (b > best_bound) {
            best_bound = b;
            best = i;
        }
    }
    return best;
}

/// Stopping test with the horizon divided out: stop when the per-sample VOI
/// bound of alpha and of every other arm is at most the sample cost.
/// Never stops at c <= 0.
inline bool should_stop(const VoiContext& ctx, double cost) {
    if (!(cost > 0.0)) return false;
    if (!ctx.has_competitor()) return true;
    const std::size_t a = ctx.alpha();
    if (ctx.mean(ctx.beta()) / ctx.n(a) * crossing_probability_bound(ctx, a) > cost) return false;
    for (std::size_t i = 0; i < ctx.k(); ++i) {
        if (i == a) continue;
        if ((1.0 - ctx.mean(a)) / ctx.n(i) * crossing_probability_bound(ctx, i) > cost) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Sampling loop
// ---------------------------------------------------------------------------

struct VoiRun {
    std::size_t selected = 0;
    std::uint64_t samples_used = 0;
    std::vector<std::size_t> trace;  // arm sampled at each step
    std::vector<ArmStats> stats;
};

/// Pseudo-observations added to every arm's statistics before sampling,
/// standing in for a prior (pseudo_samples observations averaging
/// pseudo_mean). They count towards the bounds but not the budget.
struct VoiPrior {
    std::uint64_t pseudo_samples = 0;
    double pseudo_mean = 0.5;
};

/// Round-robin once, then repeatedly sample the arm with the largest VOI
/// bound (N = remaining budget) until the budget is spent or, when a cost
/// is given, the stopping test fires. `draw(i)` returns a reward in [0,1].
/// The selected arm has the highest sample mean (lowest index on ties).
template <typename Draw>
VoiRun run_voi_sampling(std::size_t k, std::uint64_t budget, VoiVariant variant, std::optional<double> cost,
                        Draw&& draw, const VoiPrior& prior = {}) {
    if (k == 0) throw std::invalid_argument("run_voi_sampling: no arms");
    if (budget < k) throw std::invalid_argument("run_voi_sampling: budget smaller than the number of arms");
    VoiRun run;
    run.stats.assign(k, prior.pseudo_samples ? ArmStats::from_mean(prior.pseudo_samples, prior.pseudo_mean)
                                             : ArmStats{});
    run.trace.reserve(budget);
    auto take = [&](std::size_t i) {
        run.stats[i].record(draw(i));
        run.trace.push_back(i);
        ++run.samples_used;
    };
    for (std::size_t i = 0; i < k; ++i) take(i);
    while (run.samples_used < budget) {
        const VoiContext ctx(run.stats, budget - run.samples_used);
        if (cost && should_stop(ctx, *cost)) break;
        take(voi_select(ctx, variant));
    }
    run.selected = VoiContext(run.stats, 1).alpha();
    return run;
}

/// Flat Bernoulli instance: arm i succeeds with probability truth[i], drawn
/// from per-arm streams derived from `seed`.
inline VoiRun run_voi_policy(const std::vector<double>& truth, std::uint64_t budget, VoiVariant variant,
                             std::uint64_t seed, std::optional<double> cost = std::nullopt,
                             const VoiPrior& prior = {}) {
    ArmOutcomeStreams streams(truth, seed);
    return run_voi_sampling(
        truth.size(), budget, variant, cost, [&](std::size_t i) { return streams.draw(i) ? 1.0 : 0.0; }, prior);
}

}  // namespace selcomp
