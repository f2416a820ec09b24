#pragma once
// Regret experiments on random k-armed Bernoulli problems: policies that
// stop on their own as the sample cost varies, and fixed-budget samplers
// as the budget varies. Trials are paired: every policy in a trial sees the
// same latent rates and the same per-arm outcome streams.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "selcomp/arm_stats.hpp"
#include "selcomp/bernoulli.hpp"
#include "selcomp/blinkered.hpp"
#include "selcomp/core.hpp"
#include "selcomp/myopic.hpp"
#include "selcomp/one_armed.hpp"
#include "selcomp/stats.hpp"
#include "selcomp/ucb.hpp"
#include "selcomp/voi.hpp"

namespace selcomp::bench {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class SweepMode { Cost, Budget };

inline constexpr const char* kConfigSchema = "selcomp-experiment/1";

inline const std::vector<std::string>& cost_policies() {
    static const std::vector<std::string> ids{"blinkered", "myopic", "UCB1-B", "UCB1-b"};
    return ids;
}

inline const std::vector<std::string>& budget_policies() {
    static const std::vector<std::string> ids{"VOI", "VOI+", "UCB1"};
    return ids;
}

/// Log-spaced costs from 10^lo to 10^hi inclusive.
inline std::vector<double> log_spaced(double lo_exp, double hi_exp, std::size_t points) {
    if (points < 2) return {std::pow(10.0, lo_exp)};
    std::vector<double> out(points);
    for (std::size_t i = 0; i < points; ++i)
        out[i] = std::pow(10.0, lo_exp + (hi_exp - lo_exp) * static_cast<double>(i) / static_cast<double>(points - 1));
    return out;
}

inline std::vector<double> default_costs() { return log_spaced(-4.5, -1.5, 7); }
inline std::vector<std::uint64_t> default_budgets() { return {200, 400, 800, 1600, 2000}; }

struct ExperimentConfig {
    std::size_t k = 25;
    SweepMode mode = SweepMode::Cost;
    std::vector<double> costs = default_costs();
    std::vector<std::uint64_t> budgets = default_budgets();
    std::size_t trials = 1000;
    std::vector<std::string> policies;  // empty: every policy of the mode
    std::uint64_t seed = 1;
    std::string output;
    std::size_t grid_points = kDefaultLambdaGrid;
    RegretConvention regret = RegretConvention::Latent;
    double exploration = kUcb1Exploration;
    std::size_t workers = 1;
    std::uint64_t step_cap = 10'000'000;  // per trial, cost mode

    std::vector<std::string> effective_policies() const {
        if (!policies.empty()) return policies;
        return mode == SweepMode::Cost ? cost_policies() : budget_policies();
    }
};

inline void validate(const ExperimentConfig& c) {
    if (c.k == 0) throw ConfigError("k must be positive");
    if (c.trials == 0) throw ConfigError("trials must be positive");
    if (c.grid_points < 2) throw ConfigError("grid_points must be at least 2");
    if (!(c.exploration >= 0.0)) throw ConfigError("exploration must be nonnegative");
    const auto& allowed = c.mode == SweepMode::Cost ? cost_policies() : budget_policies();
    for (const auto& p : c.effective_policies())
        if (std::find(allowed.begin(), allowed.end(), p) == allowed.end()) {
            if (c.mode == SweepMode::Cost && p == "UCB1")
                throw ConfigError("policy UCB1 has no stopping rule and cannot run a cost sweep (use UCB1-B or UCB1-b)");
            throw ConfigError("policy '" + p + "' is not available in this sweep mode");
        }
    if (c.mode == SweepMode::Cost) {
        if (c.costs.empty()) throw ConfigError("cost grid is empty");
        for (double x : c.costs)
            if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("costs must be positive and finite");
    } else {
        if (c.budgets.empty()) throw ConfigError("budget grid is empty");
        for (auto b : c.budgets)
            if (b < c.k) throw ConfigError("every budget must be at least k");
    }
}

// ---------------------------------------------------------------------------
// JSON config
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["schema"] = kConfigSchema;
    j["k"] = c.k;
    j["mode"] = c.mode == SweepMode::Cost ? "cost-sweep" : "budget-sweep";
    j["costs"] = c.costs;
    j["budgets"] = c.budgets;
    j["trials"] = c.trials;
    j["policies"] = c.effective_policies();
    j["seed"] = c.seed;
    j["output"] = c.output;
    j["grid_points"] = c.grid_points;
    j["regret"] = c.regret == RegretConvention::Latent ? "latent" : "realized";
    j["exploration"] = c.exploration;
    return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (!j.contains("schema") || j["schema"] != kConfigSchema)
        throw ConfigError(std::string("config schema must be \"") + kConfigSchema + "\"");
    static const std::vector<std::string> known{"schema", "k",      "mode",        "costs",  "budgets",    "trials",
                                                "policies", "seed", "output", "grid_points", "regret", "exploration",
                                                "workers"};
    for (const auto& item : j.items())
        if (std::find(known.begin(), known.end(), item.key()) == known.end())
            throw ConfigError("unknown config key '" + item.key() + "'");
    ExperimentConfig c;
    try {
        if (j.contains("mode")) {
            const auto m = j["mode"].get<std::string>();
            if (m == "cost-sweep")
                c.mode = SweepMode::Cost;
            else if (m == "budget-sweep")
                c.mode = SweepMode::Budget;
            else
                throw ConfigError("mode must be cost-sweep or budget-sweep");
        }
        if (j.contains("k")) c.k = j["k"].get<std::size_t>();
        if (j.contains("costs")) c.costs = j["costs"].get<std::vector<double>>();
        if (j.contains("budgets")) c.budgets = j["budgets"].get<std::vector<std::uint64_t>>();
        if (j.contains("trials")) c.trials = j["trials"].get<std::size_t>();
        if (j.contains("policies")) c.policies = j["policies"].get<std::vector<std::string>>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("output")) c.output = j["output"].get<std::string>();
        if (j.contains("grid_points")) c.grid_points = j["grid_points"].get<std::size_t>();
        if (j.contains("exploration")) c.exploration = j["exploration"].get<double>();
        if (j.contains("workers")) c.workers = j["workers"].get<std::size_t>();
        if (j.contains("regret")) {
            const auto r = j["regret"].get<std::string>();
            if (r == "latent")
                c.regret = RegretConvention::Latent;
            else if (r == "realized")
                c.regret = RegretConvention::Realized;
            else
                throw ConfigError("regret must be latent or realized");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return c;
}

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

struct RegretRecord {
    std::string policy;
    double param = 0.0;  // cost or budget
    std::size_t trial = 0;
    std::size_t selected = 0;
    std::uint64_t samples = 0;
    double regret = 0.0;
    double wall_seconds = 0.0;
};

struct TrialInstance {
    std::vector<double> truth;
    std::uint64_t stream_seed;
    std::vector<double> utilities;  // realized U_i
};

inline TrialInstance make_trial(const ExperimentConfig& c, std::size_t trial) {
    TrialInstance t;
    t.truth = sample_truth(c.k, derive_seed(c.seed, trial, 0));
    t.stream_seed = derive_seed(c.seed, trial, 1);
    t.utilities = realized_utilities(t.truth, derive_seed(c.seed, trial, 2));
    return t;
}

inline double trial_regret(const ExperimentConfig& c, const TrialInstance& t, std::size_t selected,
                           std::uint64_t n, double cost) {
    return regret(c.regret == RegretConvention::Latent ? t.truth : t.utilities, selected, n, cost);
}

struct StoppingRun {
    std::size_t selected = 0;
    std::uint64_t samples = 0;
};

/// Runs a Bayesian stopping policy from the uniform prior until it stops.
template <typename Policy>
StoppingRun run_until_stop(std::size_t k, const std::vector<double>& truth, std::uint64_t stream_seed,
                           std::uint64_t step_cap, Policy&& policy) {
    ArmOutcomeStreams streams(truth, stream_seed);
    FlatState s(k);
    for (;;) {
        const MetaAction a = policy(s);
        if (a.is_stop()) break;
        if (s.samples_used() >= step_cap) throw std::runtime_error("policy exceeded the per-trial step cap");
        s.record(a.arm(), streams.draw(a.arm()));
    }
    return {best_arm(s), s.samples_used()};
}

struct BudgetRun {
    std::size_t selected = 0;
    std::uint64_t samples = 0;
};

/// UCB1 for a fixed budget; selects the highest sample mean.
inline BudgetRun run_ucb1_budget(const std::vector<double>& truth, std::uint64_t budget, std::uint64_t stream_seed,
                                 double exploration = kUcb1Exploration) {
    ArmOutcomeStreams streams(truth, stream_seed);
    std::vector<ArmStats> stats(truth.size());
    for (std::uint64_t t = 0; t < budget; ++t) {
        const std::size_t i = ucb1_choose(stats, t, exploration);
        stats[i].record(streams.draw(i) ? 1.0 : 0.0);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < stats.size(); ++i)
        if (stats[i].mean() > stats[best].mean()) best = i;
    return {best, budget};
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Records ordered by cost, then trial, then policy in config order.
inline std::vector<RegretRecord> run_cost_sweep(const ExperimentConfig& c) {
    validate(c);
    if (c.mode != SweepMode::Cost) throw ConfigError("run_cost_sweep needs mode cost-sweep");
    const auto policies = c.effective_policies();
    const bool needs_index = std::find(policies.begin(), policies.end(), "blinkered") != policies.end() ||
                             std::find(policies.begin(), policies.end(), "UCB1-B") != policies.end();
    std::vector<RegretRecord> out;
    for (double cost : c.costs) {
        std::optional<BlinkeredIndex> index;
        if (needs_index) index.emplace(cost, c.grid_points, BlinkeredIndex::Build::Lazy);
        std::vector<std::vector<RegretRecord>> per_trial(c.trials);
        parallel_for(c.trials, c.workers, [&](std::size_t trial) {
            const TrialInstance inst = make_trial(c, trial);
            for (const auto& p : policies) {
                const auto t0 = std::chrono::steady_clock::now();
                StoppingRun run;
                if (p == "blinkered") {
                    run = run_until_stop(c.k, inst.truth, inst.stream_seed, c.step_cap,
                                         [&](const FlatState& s) { return blinkered_policy(*index, s); });
                } else if (p == "myopic") {
                    run = run_until_stop(c.k, inst.truth, inst.stream_seed, c.step_cap,
                                         [&](const FlatState& s) { return myopic_policy(s, cost); });
                } else {
                    const StopRule rule = p == "UCB1-B" ? StopRule::Blinkered : StopRule::Myopic;
                    run = run_until_stop(c.k, inst.truth, inst.stream_seed, c.step_cap, [&](const FlatState& s) {
                        return ucb1_stopping_variant(s, cost, rule, index ? &*index : nullptr, c.exploration);
                    });
                }
                per_trial[trial].push_back({p, cost, trial, run.selected, run.samples,
                                            trial_regret(c, inst, run.selected, run.samples, cost),
                                            detail::seconds_since(t0)});
            }
        });
        for (auto& v : per_trial)
            for (auto& r : v) out.push_back(std::move(r));
    }
    return out;
}

/// Records ordered by budget, then trial, then policy in config order.
/// Regret is selection regret (no sampling-cost term).
inline std::vector<RegretRecord> run_budget_sweep(const ExperimentConfig& c) {
    validate(c);
    if (c.mode != SweepMode::Budget) throw ConfigError("run_budget_sweep needs mode budget-sweep");
    const auto policies = c.effective_policies();
    std::vector<RegretRecord> out;
    for (std::uint64_t budget : c.budgets) {
        std::vector<std::vector<RegretRecord>> per_trial(c.trials);
        parallel_for(c.trials, c.workers, [&](std::size_t trial) {
            const TrialInstance inst = make_trial(c, trial);
            for (const auto& p : policies) {
                const auto t0 = std::chrono::steady_clock::now();
                std::size_t selected = 0;
                std::uint64_t used = 0;
                if (p == "UCB1") {
                    const auto r = run_ucb1_budget(inst.truth, budget, inst.stream_seed, c.exploration);
                    selected = r.selected;
                    used = r.samples;
                } else {
                    const auto r = run_voi_policy(inst.truth, budget,
                                                  p == "VOI" ? VoiVariant::Hoeffding : VoiVariant::Erf,
                                                  inst.stream_seed);
                    selected = r.selected;
                    used = r.samples_used;
                }
                per_trial[trial].push_back({p, static_cast<double>(budget), trial, selected, used,
                                            trial_regret(c, inst, selected, used, 0.0), detail::seconds_since(t0)});
            }
        });
        for (auto& v : per_trial)
            for (auto& r : v) out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<RegretRecord> run_experiment(const ExperimentConfig& c) {
    return c.mode == SweepMode::Cost ? run_cost_sweep(c) : run_budget_sweep(c);
}

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

struct SummaryRow {
    std::string policy;
    double param = 0.0;
    double mean_regret = 0.0;
    std::optional<double> se;
    std::size_t trials = 0;
    double mean_samples = 0.0;
};

/// One row per (policy, parameter), sorted by policy name then parameter.
/// Within a cell records are reduced in trial order, so the result does not
/// depend on the order of `records`.
inline std::vector<SummaryRow> summarize(std::span<const RegretRecord> records) {
    if (records.empty()) throw std::invalid_argument("summarize: no records");
    std::map<std::pair<std::string, double>, std::vector<const RegretRecord*>> cells;
    for (const auto& r : records) cells[{r.policy, r.param}].push_back(&r);
    std::vector<SummaryRow> out;
    for (auto& [key, rs] : cells) {
        std::sort(rs.begin(), rs.end(), [](const RegretRecord* a, const RegretRecord* b) {
            return std::tie(a->trial, a->regret, a->samples) < std::tie(b->trial, b->regret, b->samples);
        });
        std::vector<double> regrets, samples;
        for (const auto* r : rs) {
            regrets.push_back(r->regret);
            samples.push_back(static_cast<double>(r->samples));
        }
        const MeanEstimate e = estimate_mean(regrets);
        out.push_back({key.first, key.second, e.mean, e.se, rs.size(), estimate_mean(samples).mean});
    }
    return out;
}

/// Per-trial regrets of one cell, indexed by trial.
inline std::vector<double> cell_regrets(std::span<const RegretRecord> records, const std::string& policy,
                                        double param) {
    std::vector<std::pair<std::size_t, double>> xs;
    for (const auto& r : records)
        if (r.policy == policy && r.param == param) xs.emplace_back(r.trial, r.regret);
    std::sort(xs.begin(), xs.end());
    std::vector<double> out;
    for (const auto& x : xs) out.push_back(x.second);
    return out;
}

/// Largest SE / mean over cells with a defined SE and a positive mean.
inline std::optional<double> max_relative_error(const std::vector<SummaryRow>& rows) {
    std::optional<double> worst;
    for (const auto& r : rows)
        if (r.se && r.mean_regret > 0.0) worst = std::max(worst.value_or(0.0), *r.se / r.mean_regret);
    return worst;
}

inline std::string format_short(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

inline void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "policy,sweep_param,mean_regret,se,trials,mean_samples\n";
    for (const auto& r : rows)
        out << r.policy << ',' << format_short(r.param) << ',' << format_short(r.mean_regret) << ','
            << (r.se ? format_short(*r.se) : std::string()) << ',' << r.trials << ','
            << format_short(r.mean_samples) << '\n';
}

/// Raw records; wall time is only written on request since it varies run to run.
inline void write_records_csv(std::ostream& out, std::span<const RegretRecord> records, bool wall_time = false) {
    out << "policy,sweep_param,trial,selected,samples,regret" << (wall_time ? ",wall_seconds" : "") << '\n';
    for (const auto& r : records) {
        out << r.policy << ',' << format_short(r.param) << ',' << r.trial << ',' << r.selected << ',' << r.samples
            << ',' << format_real(r.regret);
        if (wall_time) out << ',' << format_short(r.wall_seconds);
        out << '\n';
    }
}

/// Mean regret against the sweep parameter, one polyline per policy.
inline void write_svg_plot(std::ostream& out, const std::vector<SummaryRow>& rows, bool log_x,
                           const std::string& x_label) {
    const double W = 640, H = 420, L = 70, R = 130, T = 20, B = 50;
    auto xmap = [&](double x) { return log_x ? std::log10(x) : x; };
    double x0 = 1e300, x1 = -1e300, y1 = 0.0;
    for (const auto& r : rows) {
        x0 = std::min(x0, xmap(r.param));
        x1 = std::max(x1, xmap(r.param));
        y1 = std::max(y1, r.mean_regret + r.se.value_or(0.0));
    }
    if (x1 <= x0) x1 = x0 + 1.0;
    if (y1 <= 0.0) y1 = 1.0;
    auto px = [&](double x) { return L + (xmap(x) - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - y / y1 * (H - T - B); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << x_label
        << (log_x ? " (log scale)" : "") << "</text>\n"
        << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
        << ")\" text-anchor=\"middle\">mean regret</text>\n"
        << "<text x=\"" << L - 6 << "\" y=\"" << T + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
        << format_short(y1) << "</text>\n"
        << "<text x=\"" << L - 6 << "\" y=\"" << H - B << "\" text-anchor=\"end\" font-size=\"11\">0</text>\n";

    std::vector<std::string> names;
    for (const auto& r : rows)
        if (std::find(names.begin(), names.end(), r.policy) == names.end()) names.push_back(r.policy);
    for (std::size_t p = 0; p < names.size(); ++p) {
        const char* color = colors[p % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto& r : rows)
            if (r.policy == names[p]) out << format_short(px(r.param)) << ',' << format_short(py(r.mean_regret)) << ' ';
        out << "\"/>\n";
        out << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (p + 1) << "\" fill=\"" << color
            << "\" font-size=\"12\">" << names[p] << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace selcomp::bench
