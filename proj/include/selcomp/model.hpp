#pragma once
// Finite metalevel MDPs: states are observation histories, actions are
// Stop or a computation, stopping pays the best expected utility and every
// computation costs c.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "selcomp/bernoulli.hpp"
#include "selcomp/core.hpp"
#include "selcomp/stats.hpp"

namespace selcomp {

struct Transition {
    std::size_t next = 0;
    double probability = 0.0;
};

struct Computation {
    std::size_t id = 0;
    std::vector<Transition> outcomes;
};

struct MetaStateSpec {
    double stop_reward = 0.0;
    std::vector<Computation> computations;  // Stop is implicit and always available
    std::string label;
};

class FiniteMetaMDP {
public:
    static constexpr double kRowTolerance = 1e-12;

    FiniteMetaMDP(std::vector<MetaStateSpec> states, std::size_t initial, double cost)
        : states_(std::move(states)), initial_(initial), cost_(cost) {
        if (states_.empty()) throw std::invalid_argument("FiniteMetaMDP: empty state set");
        if (initial_ >= states_.size()) throw std::invalid_argument("FiniteMetaMDP: initial state out of range");
        if (!(cost_ > 0.0) || !std::isfinite(cost_))
            throw std::invalid_argument("FiniteMetaMDP: computation cost must be positive and finite");
        for (std::size_t s = 0; s < states_.size(); ++s) validate_state(s);
    }

    std::size_t size() const { return states_.size(); }
    std::size_t initial() const { return initial_; }
    double cost() const { return cost_; }
    const MetaStateSpec& state(std::size_t s) const { return states_.at(s); }
    double stop_reward(std::size_t s) const { return states_.at(s).stop_reward; }

    std::string describe(std::size_t s) const {
        const auto& label = states_.at(s).label;
        return "state " + std::to_string(s) + (label.empty() ? "" : " (" + label + ")");
    }

    const Computation* find_computation(std::size_t s, std::size_t id) const {
        for (const auto& c : states_.at(s).computations)
            if (c.id == id) return &c;
        return nullptr;
    }

    /// States ordered so every successor precedes its predecessors, or
    /// nullopt when the transition graph has a cycle.
    std::optional<std::vector<std::size_t>> reverse_topological_order() const {
        enum class Mark : unsigned char { White, Grey, Black };
        std::vector<Mark> mark(states_.size(), Mark::White);
        std::vector<std::size_t> order;
        order.reserve(states_.size());
        // Iterative DFS; frame = (state, next computation, next outcome).
        struct Frame { std::size_t s, comp, out; };
        for (std::size_t root = 0; root < states_.size(); ++root) {
            if (mark[root] != Mark::White) continue;
            std::vector<Frame> stack{{root, 0, 0}};
            mark[root] = Mark::Grey;
            while (!stack.empty()) {
                auto& top = stack.back();
                const auto& comps = states_[top.s].computations;
                if (top.comp == comps.size()) {
                    mark[top.s] = Mark::Black;
                    order.push_back(top.s);
                    stack.pop_back();
                    continue;
                }
                const auto& outs = comps[top.comp].outcomes;
                if (top.out == outs.size()) {
                    ++top.comp;
                    top.out = 0;
                    continue;
                }
                const std::size_t nxt = outs[top.out++].next;
                if (mark[nxt] == Mark::Grey) return std::nullopt;
                if (mark[nxt] == Mark::White) {
                    mark[nxt] = Mark::Grey;
                    stack.push_back({nxt, 0, 0});
                }
            }
        }
        return order;
    }

private:
    void validate_state(std::size_t s) const {
        const auto& st = states_[s];
        if (!std::isfinite(st.stop_reward))
            throw std::invalid_argument("FiniteMetaMDP: non-finite stop reward at " + describe(s));
        for (std::size_t a = 0; a < st.computations.size(); ++a) {
            const auto& comp = st.computations[a];
            for (std::size_t b = 0; b < a; ++b)
                if (st.computations[b].id == comp.id)
                    throw std::invalid_argument("FiniteMetaMDP: duplicate computation id at " + describe(s));
            if (comp.outcomes.empty())
                throw std::invalid_argument("FiniteMetaMDP: computation without outcomes at " + describe(s));
            double total = 0.0;
            for (const auto& t : comp.outcomes) {
                if (t.next >= states_.size())
                    throw std::invalid_argument("FiniteMetaMDP: successor out of range at " + describe(s));
                if (!(t.probability >= 0.0))
                    throw std::invalid_argument("FiniteMetaMDP: negative transition probability at " + describe(s));
                total += t.probability;
            }
            if (std::abs(total - 1.0) > kRowTolerance)
                throw std::invalid_argument("FiniteMetaMDP: transition row of computation " +
                                            std::to_string(comp.id) + " at " + describe(s) +
                                            " sums to " + std::to_string(total));
        }
    }

    std::vector<MetaStateSpec> states_;
    std::size_t initial_;
    double cost_;
};

struct ActionValue {
    MetaAction action;
    double q;
};

struct SolvedMDP {
    std::vector<double> optimal_value;
    std::vector<MetaAction> optimal_action;
    // Per state: Stop first, then every admissible computation in declaration order.
    std::vector<std::vector<ActionValue>> q_values;

    std::optional<double> q(std::size_t s, MetaAction a) const {
        for (const auto& av : q_values.at(s))
            if (av.action == a) return av.q;
        return std::nullopt;
    }

    std::vector<std::optional<MetaAction>> policy() const {
        return {optimal_action.begin(), optimal_action.end()};
    }
};

/// Restricts which computations a solve may use; Stop is always allowed.
using ComputationFilter = std::function<bool(std::size_t state, std::size_t computation_id)>;

namespace detail {

// Stop wins ties within kTieTolerance; among computations the first declared wins.
inline void choose(const std::vector<ActionValue>& qs, double& value, MetaAction& action) {
    double best_comp = -std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    for (std::size_t j = 1; j < qs.size(); ++j)
        if (qs[j].q > best_comp + kTieTolerance) {
            best_comp = qs[j].q;
            best_idx = j;
        }
    const double stop = qs[0].q;
    if (best_idx == 0 || stop >= best_comp - kTieTolerance) {
        action = MetaAction::stop();
    } else {
        action = qs[best_idx].action;
    }
    value = std::max(stop, best_comp);
}

inline double backup(const FiniteMetaMDP& mdp, const Computation& comp, const std::vector<double>& v) {
    double ev = 0.0;
    for (const auto& t : comp.outcomes) ev += t.probability * v[t.next];
    return -mdp.cost() + ev;
}

}  // namespace detail

/// Exact backward induction. Without a horizon the transition graph must be
/// acyclic; with one, the returned tables are those with `horizon`
/// computations still allowed.
inline SolvedMDP solve_exact(const FiniteMetaMDP& mdp, std::optional<std::size_t> horizon = std::nullopt,
                             const ComputationFilter& filter = {}) {
    const std::size_t n = mdp.size();
    auto allowed = [&](std::size_t s, std::size_t id) { return !filter || filter(s, id); };
    SolvedMDP out;
    out.optimal_value.assign(n, 0.0);
    out.optimal_action.assign(n, MetaAction::stop());
    out.q_values.assign(n, {});

    auto solve_state = [&](std::size_t s, const std::vector<double>& next_values) {
        auto& qs = out.q_values[s];
        qs.clear();
        qs.push_back({MetaAction::stop(), mdp.stop_reward(s)});
        for (const auto& comp : mdp.state(s).computations)
            if (allowed(s, comp.id))
                qs.push_back({MetaAction::sample(comp.id), detail::backup(mdp, comp, next_values)});
        detail::choose(qs, out.optimal_value[s], out.optimal_action[s]);
    };

    if (!horizon) {
        const auto order = mdp.reverse_topological_order();
        if (!order)
            throw std::invalid_argument("solve_exact: transition graph is cyclic; supply a finite horizon");
        for (std::size_t s : *order) solve_state(s, out.optimal_value);
        return out;
    }
    if (*horizon == 0) throw std::invalid_argument("solve_exact: horizon must be positive");
    std::vector<double> prev(n);
    for (std::size_t s = 0; s < n; ++s) prev[s] = mdp.stop_reward(s);
    for (std::size_t t = 1; t <= *horizon; ++t) {
        for (std::size_t s = 0; s < n; ++s) solve_state(s, prev);
        prev = out.optimal_value;
    }
    return out;
}

/// One-step lookahead Q-values: each computation is assumed to be the last.
inline std::vector<ActionValue> myopic_q_values(const FiniteMetaMDP& mdp, std::size_t s) {
    std::vector<ActionValue> qs{{MetaAction::stop(), mdp.stop_reward(s)}};
    for (const auto& comp : mdp.state(s).computations) {
        double ev = 0.0;
        for (const auto& t : comp.outcomes) ev += t.probability * mdp.stop_reward(t.next);
        qs.push_back({MetaAction::sample(comp.id), ev - mdp.cost()});
    }
    return qs;
}

inline MetaAction myopic_action(const FiniteMetaMDP& mdp, std::size_t s) {
    double v;
    MetaAction a = MetaAction::stop();
    detail::choose(myopic_q_values(mdp, s), v, a);
    return a;
}

// ---------------------------------------------------------------------------
// Monte Carlo policy evaluation
// ---------------------------------------------------------------------------

struct EvaluationOptions {
    std::size_t workers = 1;
    std::uint64_t step_cap = 10'000'000;
};

struct PolicyEvaluation {
    double mean_reward = 0.0;
    double reward_se = 0.0;
    double mean_computations = 0.0;
    double computations_se = 0.0;
};

/// Simulates `policy` from the initial state. policy(s) returns the action at
/// state s, or nullopt when the policy is undefined there.
template <typename Policy>
    requires std::is_invocable_r_v<std::optional<MetaAction>, Policy, std::size_t>
PolicyEvaluation evaluate_policy(const FiniteMetaMDP& mdp, Policy&& policy, std::size_t trials,
                                 std::uint64_t seed, const EvaluationOptions& options = {}) {
    if (trials == 0) throw std::invalid_argument("evaluate_policy: trials must be positive");
    std::vector<double> rewards(trials), counts(trials);
    parallel_for(trials, options.workers, [&](std::size_t trial) {
        Rng rng(derive_seed(seed, trial));
        std::size_t s = mdp.initial();
        double total = 0.0;
        std::uint64_t steps = 0;
        for (;;) {
            const std::optional<MetaAction> a = policy(s);
            if (!a) throw std::runtime_error("evaluate_policy: policy undefined at " + mdp.describe(s));
            if (a->is_stop()) {
                total += mdp.stop_reward(s);
                break;
            }
            const Computation* comp = mdp.find_computation(s, a->arm());
            if (!comp)
                throw std::runtime_error("evaluate_policy: computation " + std::to_string(a->arm()) +
                                         " not available at " + mdp.describe(s));
            if (++steps > options.step_cap)
                throw std::runtime_error("evaluate_policy: trial exceeded the step cap of " +
                                         std::to_string(options.step_cap) + " computations");
            total -= mdp.cost();
            double u = rng.uniform();
            std::size_t next = comp->outcomes.back().next;
            for (const auto& t : comp->outcomes) {
                if (u < t.probability) {
                    next = t.next;
                    break;
                }
                u -= t.probability;
            }
            s = next;
        }
        rewards[trial] = total;
        counts[trial] = static_cast<double>(steps);
    });
    const auto r = estimate_mean(rewards);
    const auto c = estimate_mean(counts);
    return {r.mean, r.se.value_or(0.0), c.mean, c.se.value_or(0.0)};
}

inline PolicyEvaluation evaluate_policy(const FiniteMetaMDP& mdp,
                                        const std::vector<std::optional<MetaAction>>& policy,
                                        std::size_t trials, std::uint64_t seed,
                                        const EvaluationOptions& options = {}) {
    if (policy.size() != mdp.size())
        throw std::invalid_argument("evaluate_policy: policy table size does not match the state count");
    return evaluate_policy(
        mdp, [&](std::size_t s) { return policy[s]; }, trials, seed, options);
}

// ---------------------------------------------------------------------------
// Flat Bernoulli instances as explicit MDPs
// ---------------------------------------------------------------------------

/// Truncation of the infinite flat Bernoulli MDP. Computations are allowed
/// only while both limits hold; the truncated problem is itself a metalevel
/// MDP with state-dependent computation sets.
struct FlatTruncation {
    std::uint64_t max_additional_samples = 8;        // over the whole problem
    std::optional<std::uint64_t> max_arm_count;      // absolute s_i + f_i per arm
};

struct FlatMDP {
    FiniteMetaMDP mdp;
    std::vector<FlatState> states;  // index-aligned with mdp
};

/// With `context`, a further arm of known value is available at stop time.
inline FlatMDP build_flat_mdp(const FlatState& initial, double cost, const FlatTruncation& trunc,
                              std::optional<double> context = std::nullopt) {
    std::vector<FlatState> states{initial};
    std::map<std::vector<std::uint64_t>, std::size_t> index;
    auto key = [](const FlatState& s) {
        std::vector<std::uint64_t> k;
        for (const auto& a : s.arms()) {
            k.push_back(a.successes);
            k.push_back(a.failures);
        }
        return k;
    };
    index.emplace(key(initial), 0);
    std::vector<MetaStateSpec> specs;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const FlatState cur = states[i];
        MetaStateSpec spec;
        spec.stop_reward = context ? std::max(*context, stop_value(cur)) : stop_value(cur);
        for (std::size_t a = 0; a < cur.k(); ++a) {
            spec.label += (a ? " " : "") + std::to_string(cur.arm(a).successes) + "/" +
                          std::to_string(cur.arm(a).failures);
        }
        if (cur.samples_used() < trunc.max_additional_samples) {
            for (std::size_t arm = 0; arm < cur.k(); ++arm) {
                if (trunc.max_arm_count && cur.arm(arm).n() >= *trunc.max_arm_count) continue;
                Computation comp{arm, {}};
                const double p = predictive_success(cur.arm(arm));
                for (bool success : {true, false}) {
                    FlatState nxt = apply_outcome(cur, arm, success);
                    auto [it, inserted] = index.emplace(key(nxt), states.size());
                    if (inserted) states.push_back(nxt);
                    comp.outcomes.push_back({it->second, success ? p : 1.0 - p});
                }
                spec.computations.push_back(std::move(comp));
            }
        }
        specs.push_back(std::move(spec));
    }
    return FlatMDP{FiniteMetaMDP(std::move(specs), 0, cost), std::move(states)};
}

// ---------------------------------------------------------------------------
// Value of perfect information
// ---------------------------------------------------------------------------

/// E[max_i U_i | s] - max_i mu_i(s) in closed form. Given the state the U_i
/// are independent Bernoulli(mu_i), so E[max] = 1 - prod(1 - mu_i).
inline double vpi_exact(const FlatState& s) {
    double all_fail = 1.0;
    for (double m : s.means()) all_fail *= (1.0 - m);
    return std::max(0.0, 1.0 - all_fail - stop_value(s));
}

struct VpiEstimate {
    double value = 0.0;
    double se = 0.0;
};

/// Monte Carlo estimate of the value of perfect information. The optimal
/// policy's expected number of computations is at most this divided by c.
inline VpiEstimate vpi_bound(const FlatState& s, std::size_t mc_samples, std::uint64_t seed) {
    if (mc_samples == 0) throw std::invalid_argument("vpi_bound: mc_samples must be positive");
    Rng rng(seed);
    const auto means = s.means();
    const double best = stop_value(s);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t t = 0; t < mc_samples; ++t) {
        double mx = 0.0;
        // Drawing every arm keeps the stream layout independent of outcomes.
        for (double m : means)
            if (rng.bernoulli(m)) mx = 1.0;
        sum += mx;
        sum_sq += mx * mx;
    }
    const double n = static_cast<double>(mc_samples);
    const double mean = sum / n;
    const double var = mc_samples > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
    return {mean - best, std::sqrt(var / n)};
}

}  // namespace selcomp
