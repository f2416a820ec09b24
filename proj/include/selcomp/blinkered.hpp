#pragma once
// Blinkered policy: for each arm, the best value achievable by policies
// that only ever sample that arm. With independent arms this equals the
// optimal sampling Q-value of a one-armed problem whose known arm is worth
// the best competing posterior mean, so one family of one-armed tables over
// a lambda grid serves every state and every k.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "selcomp/bernoulli.hpp"
#include "selcomp/core.hpp"
#include "selcomp/one_armed.hpp"

namespace selcomp {

inline constexpr std::size_t kDefaultLambdaGrid = 129;

/// One-armed tables at D equally spaced lambda values covering [0, 1].
/// Tables are either built up front or on first use; either way the index
/// is safe to share between threads once constructed.
class BlinkeredIndex {
public:
    enum class Build { Eager, Lazy };

    BlinkeredIndex(double cost, std::size_t grid_points, Build mode = Build::Eager, std::size_t workers = 1)
        : cost_(cost), slots_(grid_points) {
        if (!(cost > 0.0)) throw std::invalid_argument("BlinkeredIndex: cost must be positive");
        if (grid_points < 2) throw std::invalid_argument("BlinkeredIndex: need at least two grid points");
        if (mode == Build::Eager)
            parallel_for(grid_points, workers, [&](std::size_t j) { (void)table(j); });
    }

    double cost() const { return cost_; }
    std::size_t grid_points() const { return slots_.size(); }

    double grid_lambda(std::size_t j) const {
        if (j + 1 == slots_.size()) return 1.0;
        return static_cast<double>(j) / static_cast<double>(slots_.size() - 1);
    }

    const OneArmedTable& table(std::size_t j) const {
        Slot& slot = slots_.at(j);
        std::call_once(slot.once, [&] {
            if (!slot.table) slot.table = std::make_unique<OneArmedTable>(solve_one_armed(grid_lambda(j), cost_));
        });
        return *slot.table;
    }

    bool is_built(std::size_t j) const { return slots_.at(j).table != nullptr; }

    /// Sampling Q-value of an arm with counts x against a known value lambda,
    /// linearly interpolated between the bracketing grid tables. At or past
    /// the sample bound for lambda itself the one-step value is exact.
    double interpolated_q(const BetaCounts& x, double lambda) const {
        lambda = std::clamp(lambda, 0.0, 1.0);
        if (x.successes + x.failures >= one_armed_sample_bound(lambda, cost_)) {
            const double p = predictive_success(x);
            return p * std::max(lambda, posterior_mean({x.successes + 1, x.failures})) +
                   (1.0 - p) * std::max(lambda, posterior_mean({x.successes, x.failures + 1})) - cost_;
        }
        const double pos = lambda * static_cast<double>(slots_.size() - 1);
        std::size_t j = static_cast<std::size_t>(std::floor(pos));
        if (j >= slots_.size() - 1) j = slots_.size() - 2;
        const double w = pos - static_cast<double>(j);
        const double lo = table(j).q_sample(x.successes, x.failures);
        if (w == 0.0) return lo;
        const double hi = table(j + 1).q_sample(x.successes, x.failures);
        if (w == 1.0) return hi;
        return (1.0 - w) * lo + w * hi;
    }

    // Adopts a table loaded from a dump; its lambda must match the slot.
    void install(std::size_t j, OneArmedTable t) {
        if (std::abs(t.lambda() - grid_lambda(j)) > 1e-15 || t.cost() != cost_)
            throw std::invalid_argument("BlinkeredIndex: table does not match grid slot " + std::to_string(j));
        Slot& slot = slots_.at(j);
        std::call_once(slot.once, [&] { slot.table = std::make_unique<OneArmedTable>(std::move(t)); });
    }

private:
    struct Slot {
        std::once_flag once;
        std::unique_ptr<OneArmedTable> table;
    };

    double cost_;
    mutable std::vector<Slot> slots_;
};

inline BlinkeredIndex blinkered_build(double cost, std::size_t grid_points = kDefaultLambdaGrid,
                                      std::size_t workers = 1) {
    return BlinkeredIndex(cost, grid_points, BlinkeredIndex::Build::Eager, workers);
}

/// Blinkered Q-value of sampling `arm`, from the interpolated table index.
inline double blinkered_q(const BlinkeredIndex& index, const FlatState& s, std::size_t arm) {
    if (arm >= s.k()) throw std::out_of_range("blinkered_q: arm out of range");
    const TopTwo top = top_two(s.means());
    return index.interpolated_q(s.arm(arm), top.max_excluding(arm));
}

/// Blinkered Q-value with the one-armed problem solved at the exact
/// competing mean instead of interpolating.
inline double blinkered_q_exact(const FlatState& s, std::size_t arm, double cost) {
    if (arm >= s.k()) throw std::out_of_range("blinkered_q_exact: arm out of range");
    const TopTwo top = top_two(s.means());
    const auto& x = s.arm(arm);
    return solve_one_armed(top.max_excluding(arm), cost).q_sample(x.successes, x.failures);
}

namespace detail {

template <typename QFn>
MetaAction argmax_with_stop(const FlatState& s, QFn&& q_of_arm) {
    const double stop = stop_value(s);
    double best_q = -std::numeric_limits<double>::infinity();
    std::size_t best_arm = 0;
    for (std::size_t i = 0; i < s.k(); ++i) {
        const double q = q_of_arm(i);
        if (q > best_q + kTieTolerance) {
            best_q = q;
            best_arm = i;
        }
    }
    if (stop >= best_q - kTieTolerance) return MetaAction::stop();
    return MetaAction::sample(best_arm);
}

}  // namespace detail

inline MetaAction blinkered_policy(const BlinkeredIndex& index, const FlatState& s) {
    const TopTwo top = top_two(s.means());
    return detail::argmax_with_stop(
        s, [&](std::size_t i) { return index.interpolated_q(s.arm(i), top.max_excluding(i)); });
}

// Grid dump: the index parameters followed by every table in grid order.
inline void write_blinkered_index(std::ostream& out, const BlinkeredIndex& index) {
    out << "# selcomp blinkered index v1\n"
        << "cost,grid_points\n"
        << format_real(index.cost()) << ',' << index.grid_points() << '\n';
    for (std::size_t j = 0; j < index.grid_points(); ++j) write_one_armed_table(out, index.table(j));
}

inline BlinkeredIndex read_blinkered_index(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "# selcomp blinkered index v1")
        throw std::runtime_error("blinkered index: unrecognised header");
    std::getline(in, line);
    if (!std::getline(in, line)) throw std::runtime_error("blinkered index: missing parameters");
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("blinkered index: malformed parameters");
    const double cost = std::stod(line.substr(0, comma));
    const std::size_t grid = std::stoul(line.substr(comma + 1));
    BlinkeredIndex index(cost, grid, BlinkeredIndex::Build::Lazy);
    for (std::size_t j = 0; j < grid; ++j) index.install(j, read_one_armed_table(in));
    return index;
}

}  // namespace selcomp
