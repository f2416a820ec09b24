#pragma once
// Executable structural results about optimal metalevel policies:
//   * non-indexability: a context arm of known value can flip which
//     computation is optimal;
//   * possibly unbounded computation: an optimal policy that can sample
//     forever with positive probability;
//   * the context interval: for fixed state, the set of context values at
//     which continuing is optimal is an interval around the best mean.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "selcomp/bernoulli.hpp"
#include "selcomp/model.hpp"
#include "selcomp/one_armed.hpp"

namespace selcomp::counterexamples {

// ---------------------------------------------------------------------------
// Non-indexability
// ---------------------------------------------------------------------------

/// Two uncertain arms, each revealed exactly by one computation, plus a
/// context arm of known value lambda. Each uncertain utility takes one of
/// two equally likely values.
struct Example4Config {
    std::array<double, 2> u1_values{-1.5, 1.5};
    std::array<double, 2> u2_values{0.25, 1.75};
    double cost = 0.2;
    double lambda = 0.0;
};

inline constexpr std::size_t kObserveU1 = 0;
inline constexpr std::size_t kObserveU2 = 1;

// Observation status per utility: 0 unobserved, 1 low value seen, 2 high value seen.
inline std::size_t example4_state_index(int o1, int o2) { return static_cast<std::size_t>(o1 * 3 + o2); }

inline FiniteMetaMDP build_example4_mdp(const Example4Config& cfg) {
    auto expected = [](const std::array<double, 2>& v, int o) {
        return o == 0 ? 0.5 * (v[0] + v[1]) : v[static_cast<std::size_t>(o - 1)];
    };
    static const char* names[] = {"?", "lo", "hi"};
    std::vector<MetaStateSpec> states(9);
    for (int o1 = 0; o1 < 3; ++o1) {
        for (int o2 = 0; o2 < 3; ++o2) {
            auto& st = states[example4_state_index(o1, o2)];
            st.stop_reward = std::max({cfg.lambda, expected(cfg.u1_values, o1), expected(cfg.u2_values, o2)});
            st.label = std::string("U1=") + names[o1] + " U2=" + names[o2];
            if (o1 == 0)
                st.computations.push_back(
                    {kObserveU1, {{example4_state_index(1, o2), 0.5}, {example4_state_index(2, o2), 0.5}}});
            if (o2 == 0)
                st.computations.push_back(
                    {kObserveU2, {{example4_state_index(o1, 1), 0.5}, {example4_state_index(o1, 2), 0.5}}});
        }
    }
    return FiniteMetaMDP(std::move(states), example4_state_index(0, 0), cfg.cost);
}

struct QGaps {
    double observe_u1 = 0.0;  // Q*(s0, observe U1) - Q*(s0, stop)
    double observe_u2 = 0.0;
};

inline QGaps example4_qgaps(double lambda, Example4Config cfg = {}) {
    cfg.lambda = lambda;
    const FiniteMetaMDP mdp = build_example4_mdp(cfg);
    const SolvedMDP sol = solve_exact(mdp);
    const std::size_t s0 = mdp.initial();
    const double stop = *sol.q(s0, MetaAction::stop());
    return {*sol.q(s0, MetaAction::sample(kObserveU1)) - stop, *sol.q(s0, MetaAction::sample(kObserveU2)) - stop};
}

struct GapRow {
    double lambda;
    QGaps gaps;
};

struct IndexabilitySweep {
    std::vector<GapRow> rows;
    bool inversion = false;                 // observe-U1 strictly best somewhere, observe-U2 strictly best elsewhere
    std::vector<double> crossings;          // lambdas where gap1 - gap2 changes sign (bisected)
};

inline IndexabilitySweep example4_sweep(double lo, double hi, double step, const Example4Config& cfg = {}) {
    if (!(step > 0.0) || !(hi >= lo)) throw std::invalid_argument("example4_sweep: bad grid");
    IndexabilitySweep out;
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) {
        const double lambda = lo + static_cast<double>(i) * step;
        out.rows.push_back({lambda, example4_qgaps(lambda, cfg)});
    }
    bool first_best = false, second_best = false;
    for (const auto& r : out.rows) {
        first_best |= r.gaps.observe_u1 > std::max(0.0, r.gaps.observe_u2) + kTieTolerance;
        second_best |= r.gaps.observe_u2 > std::max(0.0, r.gaps.observe_u1) + kTieTolerance;
    }
    out.inversion = first_best && second_best;

    auto diff = [&](double lambda) {
        const auto g = example4_qgaps(lambda, cfg);
        return g.observe_u1 - g.observe_u2;
    };
    auto sign = [](double x) { return x > kTieTolerance ? 1 : (x < -kTieTolerance ? -1 : 0); };
    // Sign changes between consecutive nonzero grid values, refined by bisection.
    std::optional<std::size_t> prev;
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        const int si = sign(out.rows[i].gaps.observe_u1 - out.rows[i].gaps.observe_u2);
        if (si == 0) continue;
        if (prev && sign(out.rows[*prev].gaps.observe_u1 - out.rows[*prev].gaps.observe_u2) != si) {
            double a = out.rows[*prev].lambda, b = out.rows[i].lambda;
            const int sa = -si;
            for (int it = 0; it < 100 && b - a > 1e-13; ++it) {
                const double m = 0.5 * (a + b);
                const int sm = sign(diff(m));
                if (sm == sa)
                    a = m;
                else if (sm == 0) {
                    a = b = m;
                } else
                    b = m;
            }
            out.crossings.push_back(0.5 * (a + b));
        }
        prev = i;
    }
    return out;
}

inline void write_indexability_csv(std::ostream& out, const IndexabilitySweep& sweep) {
    out << "lambda,gap_observe_u1,gap_observe_u2\n";
    for (const auto& r : sweep.rows)
        out << format_real(r.lambda) << ',' << format_real(r.gaps.observe_u1) << ','
            << format_real(r.gaps.observe_u2) << '\n';
}

// ---------------------------------------------------------------------------
// Possibly unbounded computation
//
// Arm 1 is known to be worth 1/2; arm 2 has rate 1/3 or 2/3 with equal prior
// probability. After s successes and f failures of arm 2 the posterior odds
// of 2/3 against 1/3 are 2^(s-f), so the state is d = s - f.
// ---------------------------------------------------------------------------

inline double example3_odds_ratio(std::uint64_t s, std::uint64_t f) {
    return std::ldexp(1.0, static_cast<int>(static_cast<std::int64_t>(s) - static_cast<std::int64_t>(f)));
}

inline double example3_mean_arm2(int d) {
    const double odds = std::ldexp(1.0, d);
    const double p_high = odds / (1.0 + odds);
    return (1.0 + p_high) / 3.0;
}

struct Example3Truncation {
    int max_abs_difference = 64;
    std::size_t horizon = 4096;  // total samples allowed
};

inline constexpr std::size_t kSampleKnownArm = 0;
inline constexpr std::size_t kSampleUncertainArm = 1;

/// Chain over d in [-D, D]. Sampling the known arm teaches nothing (self
/// loop); no computation is allowed at |d| = D.
inline FiniteMetaMDP build_example3_mdp(double cost, int max_abs_difference) {
    if (max_abs_difference < 1) throw std::invalid_argument("example3: truncation must be at least 1");
    const int D = max_abs_difference;
    std::vector<MetaStateSpec> states(static_cast<std::size_t>(2 * D + 1));
    for (int d = -D; d <= D; ++d) {
        auto& st = states[static_cast<std::size_t>(d + D)];
        const double mu = example3_mean_arm2(d);
        st.stop_reward = std::max(0.5, mu);
        st.label = "d=" + std::to_string(d);
        if (std::abs(d) == D) continue;
        const auto here = static_cast<std::size_t>(d + D);
        st.computations.push_back({kSampleKnownArm, {{here, 1.0}}});
        st.computations.push_back({kSampleUncertainArm, {{here + 1, mu}, {here - 1, 1.0 - mu}}});
    }
    return FiniteMetaMDP(std::move(states), static_cast<std::size_t>(D), cost);
}

inline std::set<int> example3_continuation_at(double cost, const Example3Truncation& t) {
    const FiniteMetaMDP mdp = build_example3_mdp(cost, t.max_abs_difference);
    const SolvedMDP sol = solve_exact(mdp, t.horizon);
    std::set<int> out;
    for (int d = -t.max_abs_difference; d <= t.max_abs_difference; ++d)
        if (sol.optimal_action[static_cast<std::size_t>(d + t.max_abs_difference)].is_sample()) out.insert(d);
    return out;
}

struct Example3Result {
    std::set<int> continuation;
    Example3Truncation truncation;  // the one the result was taken from
    bool stable = false;            // unchanged when the truncation doubled
};

/// Continuation set with truncation doubling until two consecutive
/// truncations agree (at most `max_doublings` times).
inline Example3Result example3_continuation(double cost, Example3Truncation t = {}, int max_doublings = 3) {
    if (!(cost > 0.0)) throw std::invalid_argument("example3: cost must be positive");
    Example3Result r;
    r.continuation = example3_continuation_at(cost, t);
    r.truncation = t;
    for (int i = 0; i < max_doublings; ++i) {
        const Example3Truncation bigger{t.max_abs_difference * 2, t.horizon * 2};
        auto next = example3_continuation_at(cost, bigger);
        if (next == r.continuation) {
            r.stable = true;
            return r;
        }
        t = bigger;
        r.continuation = std::move(next);
        r.truncation = t;
    }
    return r;
}

struct CostBand {
    double lower;  // below this the continuation set grows past {-1, 0, 1}
    double upper;  // above this it no longer contains all of {-1, 0, 1}
};

/// Range of costs for which the optimal policy continues exactly at
/// d in {-1, 0, 1}, found by bisection in log-cost.
inline CostBand example3_band(const Example3Truncation& t = {}, double lo = 1e-4, double hi = 0.1,
                              double rel_tol = 1e-7) {
    const std::set<int> target{-1, 0, 1};
    auto contains_target = [&](double c) {
        const auto s = example3_continuation_at(c, t);
        return std::includes(s.begin(), s.end(), target.begin(), target.end());
    };
    auto within_target = [&](double c) {
        const auto s = example3_continuation_at(c, t);
        return std::includes(target.begin(), target.end(), s.begin(), s.end());
    };
    auto bisect = [&](auto&& pred_true_at_lo_side, double a, double b) {
        // pred(a) != pred(b); returns the boundary.
        const bool pa = pred_true_at_lo_side(a);
        while (b / a > 1.0 + rel_tol) {
            const double m = std::sqrt(a * b);
            if (pred_true_at_lo_side(m) == pa)
                a = m;
            else
                b = m;
        }
        return std::sqrt(a * b);
    };
    if (!contains_target(lo) || contains_target(hi) || within_target(lo) || !within_target(hi))
        throw std::runtime_error("example3_band: bracket [lo, hi] does not straddle the band");
    return {bisect(within_target, lo, hi), bisect(contains_target, lo, hi)};
}

// ---------------------------------------------------------------------------
// Context interval
// ---------------------------------------------------------------------------

struct IntervalCheck {
    std::vector<double> lambdas;
    std::vector<bool> continues;
    bool contiguous = true;
    bool contains_best_mean = true;  // vacuous when nothing continues
    std::optional<double> lo, hi;    // first and last continuing grid lambda
    double best_mean = 0.0;
};

namespace detail {

inline IntervalCheck finish_interval_check(IntervalCheck r) {
    std::optional<std::size_t> first, last;
    for (std::size_t i = 0; i < r.continues.size(); ++i)
        if (r.continues[i]) {
            if (!first) first = i;
            last = i;
        }
    if (!first) return r;
    for (std::size_t i = *first; i <= *last; ++i)
        if (!r.continues[i]) r.contiguous = false;
    r.lo = r.lambdas[*first];
    r.hi = r.lambdas[*last];
    // The true interval may extend up to (not including) the neighbouring grid points.
    const double below = *first > 0 ? r.lambdas[*first - 1] : -std::numeric_limits<double>::infinity();
    const double above = *last + 1 < r.lambdas.size() ? r.lambdas[*last + 1] : std::numeric_limits<double>::infinity();
    r.contains_best_mean = r.best_mean > below && r.best_mean < above;
    return r;
}

}  // namespace detail

/// One uncertain arm: exact one-armed solve at every grid lambda.
inline IntervalCheck interval_property_check(const std::vector<double>& lambda_grid, const BetaCounts& base,
                                             double cost) {
    if (lambda_grid.empty()) throw std::invalid_argument("interval_property_check: empty grid");
    if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end()))
        throw std::invalid_argument("interval_property_check: grid must be sorted");
    IntervalCheck r;
    r.lambdas = lambda_grid;
    r.best_mean = posterior_mean(base);
    for (double lambda : lambda_grid)
        r.continues.push_back(solve_one_armed(std::clamp(lambda, 0.0, 1.0), cost).act(base.successes, base.failures) ==
                              OneArmedAction::Sample);
    return detail::finish_interval_check(std::move(r));
}

/// Several uncertain arms: exact solve of the truncated flat problem with an
/// added context arm of value lambda.
inline IntervalCheck interval_property_check(const std::vector<double>& lambda_grid, const FlatState& base,
                                             double cost, const FlatTruncation& trunc) {
    if (lambda_grid.empty()) throw std::invalid_argument("interval_property_check: empty grid");
    if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end()))
        throw std::invalid_argument("interval_property_check: grid must be sorted");
    IntervalCheck r;
    r.lambdas = lambda_grid;
    r.best_mean = stop_value(base);
    for (double lambda : lambda_grid) {
        const FlatMDP flat = build_flat_mdp(base, cost, trunc, lambda);
        const SolvedMDP sol = solve_exact(flat.mdp);
        r.continues.push_back(sol.optimal_action[flat.mdp.initial()].is_sample());
    }
    return detail::finish_interval_check(std::move(r));
}

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
    if (points < 2) throw std::invalid_argument("uniform_grid: need at least two points");
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i)
        g[i] = i + 1 == points ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return g;
}

}  // namespace selcomp::counterexamples
