#pragma once
// Beta-Bernoulli posterior arithmetic and the flat Bernoulli metalevel state.
//
// Each arm has latent success rate Theta_i ~ Uniform[0,1]; after s successes
// and f failures the posterior is Beta(s+1, f+1), whose mean (s+1)/(n+2) is
// both the expected utility of the arm and the predictive probability that
// the next simulation of that arm succeeds.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "selcomp/core.hpp"

namespace selcomp {

struct BetaCounts {
    std::uint64_t successes = 0;
    std::uint64_t failures = 0;

    std::uint64_t n() const { return successes + failures; }
    friend bool operator==(const BetaCounts&, const BetaCounts&) = default;
};

inline double posterior_mean(const BetaCounts& c) {
    return static_cast<double>(c.successes + 1) / static_cast<double>(c.n() + 2);
}

/// Probability that the next simulated sample succeeds. Same closed form as
/// posterior_mean.
inline double predictive_success(const BetaCounts& c) { return posterior_mean(c); }

/// Belief state of the flat k-armed Bernoulli selection problem.
class FlatState {
public:
    explicit FlatState(std::size_t k) : arms_(k) {
        if (k == 0) throw std::invalid_argument("FlatState: need at least one arm");
    }
    // Pre-seeded counts act as a pseudo-count prior; samples_used starts at 0.
    explicit FlatState(std::vector<BetaCounts> seeded) : arms_(std::move(seeded)) {
        if (arms_.empty()) throw std::invalid_argument("FlatState: need at least one arm");
    }

    std::size_t k() const { return arms_.size(); }
    const std::vector<BetaCounts>& arms() const { return arms_; }
    const BetaCounts& arm(std::size_t i) const { return arms_.at(i); }
    std::uint64_t samples_used() const { return samples_used_; }

    double mean(std::size_t i) const { return posterior_mean(arms_.at(i)); }

    std::vector<double> means() const {
        std::vector<double> out(arms_.size());
        for (std::size_t i = 0; i < arms_.size(); ++i) out[i] = posterior_mean(arms_[i]);
        return out;
    }

    // Mutating update used by simulators; apply_outcome is the value form.
    void record(std::size_t arm, bool success) {
        if (arm >= arms_.size())
            throw std::out_of_range("FlatState: arm " + std::to_string(arm) + " out of range");
        if (success)
            ++arms_[arm].successes;
        else
            ++arms_[arm].failures;
        ++samples_used_;
    }

    friend bool operator==(const FlatState&, const FlatState&) = default;

private:
    std::vector<BetaCounts> arms_;
    std::uint64_t samples_used_ = 0;
};

inline FlatState apply_outcome(FlatState state, std::size_t arm, bool success) {
    state.record(arm, success);
    return state;
}

/// Best and runner-up values of a vector; best_index is the lowest index
/// attaining the maximum.
struct TopTwo {
    std::size_t best_index = 0;
    double best = 0.0;
    double second = 0.0;  // max over j != best_index; 0 when k == 1

    // max_{j != i} of the underlying values.
    double max_excluding(std::size_t i) const { return i == best_index ? second : best; }
};

inline TopTwo top_two(const std::vector<double>& values) {
    TopTwo t;
    t.best = values.at(0);
    t.second = 0.0;
    bool have_second = false;
    for (std::size_t i = 1; i < values.size(); ++i) {
        const double v = values[i];
        if (v > t.best) {
            t.second = t.best;
            have_second = true;
            t.best = v;
            t.best_index = i;
        } else if (!have_second || v > t.second) {
            t.second = v;
            have_second = true;
        }
    }
    return t;
}

/// Arm that would be selected if deliberation stopped now.
inline std::size_t best_arm(const FlatState& s) { return top_two(s.means()).best_index; }

inline double stop_value(const FlatState& s) { return top_two(s.means()).best; }

/// k independent Uniform[0,1] success rates.
inline std::vector<double> sample_truth(std::size_t k, std::uint64_t seed) {
    if (k == 0) throw std::invalid_argument("sample_truth: k must be positive");
    Rng rng(seed);
    std::vector<double> theta(k);
    for (auto& t : theta) t = rng.uniform();
    return theta;
}

/// Per-arm outcome streams. The j-th simulation of arm i is the same draw
/// whichever policy asks for it, so policies compared on one trial see
/// common random numbers.
class ArmOutcomeStreams {
public:
    ArmOutcomeStreams(std::vector<double> truth, std::uint64_t seed) : truth_(std::move(truth)) {
        streams_.reserve(truth_.size());
        for (std::size_t i = 0; i < truth_.size(); ++i) streams_.emplace_back(derive_seed(seed, i));
    }

    bool draw(std::size_t arm) { return streams_.at(arm).bernoulli(truth_[arm]); }

    // Underlying stream of one arm, for callers that need extra draws
    // (tree rollouts) interleaved with outcomes.
    Rng& stream(std::size_t arm) { return streams_.at(arm); }

    const std::vector<double>& truth() const { return truth_; }

private:
    std::vector<double> truth_;
    std::vector<Rng> streams_;
};

enum class RegretConvention { Latent, Realized };

/// max_i Theta_i - Theta_selected + c n, on latent success rates.
inline double regret(const std::vector<double>& truth, std::size_t selected, std::uint64_t n,
                     double cost) {
    if (selected >= truth.size()) throw std::out_of_range("regret: selected arm out of range");
    const double best = *std::max_element(truth.begin(), truth.end());
    return best - truth[selected] + cost * static_cast<double>(n);
}

/// Realized utilities U_i ~ Bernoulli(Theta_i), for the realized-U regret.
inline std::vector<double> realized_utilities(const std::vector<double>& truth, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> u(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) u[i] = rng.bernoulli(truth[i]) ? 1.0 : 0.0;
    return u;
}

}  // namespace selcomp
