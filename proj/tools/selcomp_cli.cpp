#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "selcomp/selcomp.hpp"

namespace {

using namespace selcomp;

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Common {
    std::uint64_t seed = 1;
    std::size_t workers = default_workers();
    std::string out;
    std::string config;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "master seed")->capture_default_str();
    sub->add_option("--workers", c.workers, "worker threads (results do not depend on it)")->capture_default_str();
    sub->add_option("--out", c.out, "output file (stdout when omitted)");
    sub->add_option("--config", c.config, "JSON file with option values; flags given on the command line win");
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::istringstream is(item);
        T v{};
        if (!(is >> v) || !is.eof()) throw ValidationError(std::string("bad value in ") + what + ": '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError(std::string(what) + " must not be empty");
    return out;
}

std::vector<std::string> parse_names(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
    std::ostringstream os;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) os << ',';
        if constexpr (std::is_floating_point_v<T>)
            os << format_real(xs[i]);
        else
            os << xs[i];
    }
    return os.str();
}

// Output sink opened before any computation so an unwritable path fails early.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (path.empty()) return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw ValidationError("cannot write output file '" + path + "'");
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }
    // Summary lines go to stdout unless the data itself is going there.
    std::ostream& summary() { return file_ ? std::cout : std::cerr; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::unique_ptr<std::ofstream> open_extra(const std::string& path) {
    if (path.empty()) return nullptr;
    auto f = std::make_unique<std::ofstream>(path);
    if (!*f) throw ValidationError("cannot write file '" + path + "'");
    return f;
}

// ---------------------------------------------------------------------------
// Config files become command-line tokens placed before the user's own
// flags; every option keeps the last value it sees.
// ---------------------------------------------------------------------------

std::string json_scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_float()) return format_real(v.get<double>());
    throw ValidationError("config values must be scalars or arrays of scalars");
}

std::vector<std::string> config_tokens(const std::string& sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed config: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    const bool bench = sub == "bench-cost" || sub == "bench-budget";
    if (bench) {
        const auto cfg = bench::config_from_json(j);
        const auto want = sub == "bench-cost" ? bench::SweepMode::Cost : bench::SweepMode::Budget;
        if (j.contains("mode") && cfg.mode != want) throw ValidationError("config mode does not match " + sub);
    }
    std::vector<std::string> tokens;
    for (const auto& [key, value] : j.items()) {
        if (key == "schema" || key == "mode") continue;
        std::string flag = key;
        for (auto& ch : flag)
            if (ch == '_') ch = '-';
        if (bench && flag == "output") flag = "out";
        if (bench && flag == "grid-points") flag = "grid";
        tokens.push_back("--" + flag);
        if (value.is_array()) {
            std::string joined;
            for (std::size_t i = 0; i < value.size(); ++i) joined += (i ? "," : "") + json_scalar(value[i]);
            tokens.push_back(joined);
        } else {
            tokens.push_back(json_scalar(value));
        }
    }
    return tokens;
}

std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    if (args.size() < 2) return args;
    std::optional<std::string> path;
    std::vector<std::string> rest;
    for (std::size_t i = 2; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (!path) return args;
    std::vector<std::string> out{args[0], args[1]};
    for (auto& t : config_tokens(args[1], *path)) out.push_back(std::move(t));
    for (auto& t : rest) out.push_back(std::move(t));
    return out;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct OneArmedArgs {
    double lambda = 0.5;
    double cost = 0.01;
};

int run_solve_one_armed(const Common& c, const OneArmedArgs& a) {
    if (!(a.lambda >= 0.0 && a.lambda <= 1.0)) throw ValidationError("--lambda must lie in [0, 1]");
    if (!(a.cost > 0.0)) throw ValidationError("--cost must be positive");
    Sink sink(c.out);
    const auto table = solve_one_armed(a.lambda, a.cost);
    if (!c.out.empty()) write_one_armed_table(sink.stream(), table);
    std::cout << "n_max = " << table.n_max() << ", value(0,0) = " << bench::format_short(table.value(0, 0))
              << ", action(0,0) = " << (table.act(0, 0) == OneArmedAction::Sample ? "sample" : "stop") << '\n';
    return 0;
}

struct BlinkeredArgs {
    double cost = 0.01;
    std::size_t grid = kDefaultLambdaGrid;
};

int run_build_blinkered(const Common& c, const BlinkeredArgs& a) {
    if (!(a.cost > 0.0)) throw ValidationError("--cost must be positive");
    if (a.grid < 2) throw ValidationError("--grid must be at least 2");
    Sink sink(c.out);
    const auto index = blinkered_build(a.cost, a.grid, c.workers);
    std::size_t entries = 0;
    std::uint64_t deepest = 0;
    for (std::size_t j = 0; j < index.grid_points(); ++j) {
        entries += index.table(j).stored_entries();
        deepest = std::max(deepest, index.table(j).n_max());
    }
    if (!c.out.empty()) write_blinkered_index(sink.stream(), index);
    std::cout << "built " << index.grid_points() << " tables at c = " << bench::format_short(a.cost)
              << ", deepest n_max = " << deepest << ", stored entries = " << entries << '\n';
    return 0;
}

struct BenchArgs {
    std::size_t k = 25;
    std::size_t trials = 1000;
    std::string costs = join(bench::default_costs());
    std::string budgets = join(bench::default_budgets());
    std::string policies;
    std::size_t grid = kDefaultLambdaGrid;
    std::string regret = "latent";
    double exploration = kUcb1Exploration;
    std::string plot;
    std::string records;
    bool timings = false;
};

int run_bench(const Common& c, const BenchArgs& a, bench::SweepMode mode) {
    bench::ExperimentConfig cfg;
    cfg.k = a.k;
    cfg.mode = mode;
    cfg.trials = a.trials;
    cfg.seed = c.seed;
    cfg.workers = c.workers;
    cfg.output = c.out;
    cfg.grid_points = a.grid;
    cfg.exploration = a.exploration;
    if (mode == bench::SweepMode::Cost)
        cfg.costs = parse_list<double>(a.costs, "--costs");
    else
        cfg.budgets = parse_list<std::uint64_t>(a.budgets, "--budgets");
    cfg.policies = parse_names(a.policies);
    if (a.regret == "latent")
        cfg.regret = RegretConvention::Latent;
    else if (a.regret == "realized")
        cfg.regret = RegretConvention::Realized;
    else
        throw ValidationError("--regret must be latent or realized");
    bench::validate(cfg);
    Sink sink(c.out);
    auto plot = open_extra(a.plot);
    auto records_file = open_extra(a.records);

    const auto records = bench::run_experiment(cfg);
    const auto rows = bench::summarize(records);
    bench::write_summary_csv(sink.stream(), rows);
    if (plot) bench::write_svg_plot(*plot, rows, mode == bench::SweepMode::Cost,
                                    mode == bench::SweepMode::Cost ? "cost per sample" : "sample budget");
    if (records_file) bench::write_records_csv(*records_file, records, a.timings);
    const auto rel = bench::max_relative_error(rows);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", rel.value_or(0.0));
    sink.summary() << rows.size() << " cells, " << cfg.trials << " trials each; relative error (SE/mean) is at most "
                   << buf << '\n';
    return 0;
}

struct CounterexampleArgs {
    std::string name;
    double lambda_lo = -2.0;
    double lambda_hi = 2.0;
    double step = 0.05;
    double cost = 0.005;
    std::uint64_t successes = 1;
    std::uint64_t failures = 1;
    std::size_t grid = 101;
};

int run_counterexample(const Common& c, const CounterexampleArgs& a) {
    namespace cx = counterexamples;
    if (a.name == "indexability") {
        if (!(a.step > 0.0) || !(a.lambda_hi >= a.lambda_lo)) throw ValidationError("bad lambda grid");
        Sink sink(c.out);
        const auto sweep = cx::example4_sweep(a.lambda_lo, a.lambda_hi, a.step);
        cx::write_indexability_csv(sink.stream(), sweep);
        sink.summary() << "inversion detected: " << (sweep.inversion ? "yes" : "no") << "; gap1 = gap2 at lambda";
        for (double x : sweep.crossings) sink.summary() << ' ' << bench::format_short(x);
        sink.summary() << '\n';
        return 0;
    }
    if (a.name == "unbounded") {
        if (!(a.cost > 0.0)) throw ValidationError("--cost must be positive");
        Sink sink(c.out);
        const auto r = cx::example3_continuation(a.cost);
        auto& os = sink.stream();
        os << "d,odds_ratio,mean_arm2,continue\n";
        for (int d = -8; d <= 8; ++d) {
            const auto s = static_cast<std::uint64_t>(std::max(d, 0));
            const auto f = static_cast<std::uint64_t>(std::max(-d, 0));
            os << d << ',' << format_real(cx::example3_odds_ratio(s, f)) << ','
               << format_real(cx::example3_mean_arm2(d)) << ',' << (r.continuation.count(d) ? 1 : 0) << '\n';
        }
        const auto band = cx::example3_band();
        auto& sm = sink.summary();
        sm << "continuation set at c = " << bench::format_short(a.cost) << ":";
        for (int d : r.continuation) sm << ' ' << d;
        sm << (r.stable ? " (stable under truncation doubling)" : " (NOT stable under truncation doubling)")
           << "; set is exactly {-1, 0, 1} for c in (" << bench::format_short(band.lower) << ", "
           << bench::format_short(band.upper) << ")\n";
        return 0;
    }
    if (a.name == "interval") {
        if (!(a.cost > 0.0)) throw ValidationError("--cost must be positive");
        if (a.grid < 2) throw ValidationError("--grid must be at least 2");
        Sink sink(c.out);
        const auto grid = cx::uniform_grid(0.0, 1.0, a.grid);
        const auto r = cx::interval_property_check(grid, BetaCounts{a.successes, a.failures}, a.cost);
        sink.stream() << "lambda,continue\n";
        for (std::size_t i = 0; i < r.lambdas.size(); ++i)
            sink.stream() << format_real(r.lambdas[i]) << ',' << (r.continues[i] ? 1 : 0) << '\n';
        auto& sm = sink.summary();
        sm << "continue set ";
        if (r.lo)
            sm << "[" << bench::format_short(*r.lo) << ", " << bench::format_short(*r.hi) << "]";
        else
            sm << "empty";
        sm << "; contiguous: " << (r.contiguous ? "yes" : "no")
           << "; contains mean " << bench::format_short(r.best_mean) << ": " << (r.contains_best_mean ? "yes" : "no") << '\n';
        return 0;
    }
    throw ValidationError("--name must be indexability, unbounded or interval");
}

struct TreeArgs {
    std::size_t branching = 4;
    std::size_t depth = 6;
    double noise = 0.25;
    std::uint64_t pseudo_counts = 2;
    std::string variant = "VOI";
    std::size_t games = 200;
};

mcts::TreeParams tree_params(const TreeArgs& t) {
    const mcts::TreeParams p{t.branching, t.depth, t.noise};
    try {
        (void)mcts::GameTree(p, 0);
    } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
    }
    return p;
}

VoiVariant parse_variant(const std::string& v) {
    if (v == "VOI") return VoiVariant::Hoeffding;
    if (v == "VOI+") return VoiVariant::Erf;
    throw ValidationError("--variant must be VOI or VOI+");
}

struct MatchArgs {
    std::string a = "hybrid";
    std::string b = "uct";
    std::uint64_t budget = 200;
    double cost = 0.001;
};

mcts::PlayerSpec player(const std::string& kind, const MatchArgs& m, const TreeArgs& t) {
    mcts::PlayerSpec p;
    p.budget = m.budget;
    p.cost = m.cost;
    p.variant = parse_variant(t.variant);
    p.prior = {t.pseudo_counts, 0.5};
    if (kind == "uct")
        p.kind = mcts::PlayerKind::Uct;
    else if (kind == "hybrid")
        p.kind = mcts::PlayerKind::Hybrid;
    else if (kind == "minimax")
        p.kind = mcts::PlayerKind::Minimax;
    else if (kind == "random")
        p.kind = mcts::PlayerKind::Random;
    else
        throw ValidationError("player must be uct, hybrid, minimax or random");
    return p;
}

int run_mcts_match(const Common& c, const MatchArgs& m, const TreeArgs& t) {
    const auto params = tree_params(t);
    const auto pa = player(m.a, m, t);
    const auto pb = player(m.b, m, t);
    if (m.budget < t.branching) throw ValidationError("--budget must be at least the branching factor");
    if (t.games == 0) throw ValidationError("--games must be positive");
    if (!(m.cost >= 0.0)) throw ValidationError("--cost must be nonnegative");
    Sink sink(c.out);
    const auto r = mcts::play_match(pa, pb, params, t.games, c.seed, c.workers);
    mcts::write_match_csv_header(sink.stream());
    mcts::write_match_csv_row(sink.stream(), m.budget, m.cost, mcts::describe(pa), r);
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.3f [%.3f, %.3f]", r.win_rate, r.ci_lo, r.ci_hi);
    sink.summary() << mcts::describe(pa) << " vs " << mcts::describe(pb) << ": win rate " << buf << " over "
                   << r.games << " games\n";
    return 0;
}

struct CalibrateArgs {
    std::string budgets = "100,200,400";
    std::string costs = "0,0.0001,0.0003,0.001,0.003,0.01,0.03,0.1";
};

int run_mcts_calibrate(const Common& c, const CalibrateArgs& a, const TreeArgs& t) {
    const auto params = tree_params(t);
    const auto budgets = parse_list<std::uint64_t>(a.budgets, "--budgets");
    const auto costs = parse_list<double>(a.costs, "--costs");
    for (auto b : budgets)
        if (b < t.branching) throw ValidationError("every budget must be at least the branching factor");
    for (double x : costs)
        if (!(x >= 0.0)) throw ValidationError("costs must be nonnegative");
    if (t.games == 0) throw ValidationError("--games must be positive");
    const auto variant = parse_variant(t.variant);
    Sink sink(c.out);
    const auto table = mcts::calibrate_cost(params, budgets, costs, t.games, c.seed, variant, c.workers,
                                            {t.pseudo_counts, 0.5});
    mcts::write_calibration_csv(sink.stream(), table);
    sink.summary() << "recommended c = " << bench::format_short(table.recommended_cost) << " (" << table.cells.size()
                   << " cells, " << t.games << " games each)\n";
    return 0;
}

void add_tree_options(CLI::App* sub, TreeArgs& t) {
    sub->add_option("--branching", t.branching, "moves per position")->capture_default_str();
    sub->add_option("--depth", t.depth, "plies per game")->capture_default_str();
    sub->add_option("--noise", t.noise, "half-width of the per-edge value noise")->capture_default_str();
    sub->add_option("--pseudo-counts", t.pseudo_counts, "pseudo-samples (mean 1/2) added to root-child statistics")
        ->capture_default_str();
    sub->add_option("--variant", t.variant, "VOI or VOI+")->capture_default_str();
    sub->add_option("--games", t.games, "games per match")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Selection of computations: one-armed and blinkered solvers, VOI-bound sampling, "
                 "counterexamples, regret benchmarks and tree search"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    Common common;
    OneArmedArgs one;
    BlinkeredArgs blink;
    BenchArgs bench_args;
    CounterexampleArgs cx;
    TreeArgs tree;
    MatchArgs match;
    CalibrateArgs calib;

    auto* s_one = app.add_subcommand("solve-one-armed", "solve the one-armed problem exactly");
    add_common(s_one, common);
    s_one->add_option("--lambda", one.lambda, "value of the known arm")->capture_default_str();
    s_one->add_option("--cost", one.cost, "cost per sample")->capture_default_str();

    auto* s_blink = app.add_subcommand("build-blinkered", "build and dump the blinkered table index");
    add_common(s_blink, common);
    s_blink->add_option("--cost", blink.cost, "cost per sample")->capture_default_str();
    s_blink->add_option("--grid", blink.grid, "number of lambda grid points")->capture_default_str();

    auto add_bench = [&](const char* name, const char* help, bool cost_mode) {
        auto* s = app.add_subcommand(name, help);
        add_common(s, common);
        s->add_option("--k", bench_args.k, "number of arms")->capture_default_str();
        s->add_option("--trials", bench_args.trials, "paired trials per grid point")->capture_default_str();
        if (cost_mode)
            s->add_option("--costs", bench_args.costs, "comma-separated cost grid")->capture_default_str();
        else
            s->add_option("--budgets", bench_args.budgets, "comma-separated budget grid")->capture_default_str();
        s->add_option("--policies", bench_args.policies,
                      cost_mode ? "subset of blinkered,myopic,UCB1-B,UCB1-b (default all)"
                                : "subset of VOI,VOI+,UCB1 (default all)");
        s->add_option("--grid", bench_args.grid, "lambda grid points of the blinkered index")->capture_default_str();
        s->add_option("--regret", bench_args.regret, "latent or realized")->capture_default_str();
        s->add_option("--exploration", bench_args.exploration, "UCB1 exploration constant")->capture_default_str();
        s->add_option("--plot", bench_args.plot, "also write an SVG plot here");
        s->add_option("--records", bench_args.records, "also write per-trial records here");
        s->add_flag("--timings", bench_args.timings, "include wall time in the records file");
        return s;
    };
    auto* s_cost = add_bench("bench-cost", "regret against sample cost for policies with a stopping rule", true);
    auto* s_budget = add_bench("bench-budget", "regret against a fixed sample budget", false);

    auto* s_cx = app.add_subcommand("counterexample", "structural results about optimal policies");
    add_common(s_cx, common);
    s_cx->add_option("--name", cx.name, "indexability, unbounded or interval")->required();
    s_cx->add_option("--lambda-lo", cx.lambda_lo, "indexability: first lambda")->capture_default_str();
    s_cx->add_option("--lambda-hi", cx.lambda_hi, "indexability: last lambda")->capture_default_str();
    s_cx->add_option("--step", cx.step, "indexability: lambda step")->capture_default_str();
    s_cx->add_option("--cost", cx.cost, "unbounded, interval: cost per sample")->capture_default_str();
    s_cx->add_option("--successes", cx.successes, "interval: successes of the uncertain arm")->capture_default_str();
    s_cx->add_option("--failures", cx.failures, "interval: failures of the uncertain arm")->capture_default_str();
    s_cx->add_option("--grid", cx.grid, "interval: lambda grid points on [0, 1]")->capture_default_str();

    auto* s_match = app.add_subcommand("mcts-match", "play a match between two tree-search players");
    add_common(s_match, common);
    add_tree_options(s_match, tree);
    s_match->add_option("--a", match.a, "player A: uct, hybrid, minimax or random")->capture_default_str();
    s_match->add_option("--b", match.b, "player B")->capture_default_str();
    s_match->add_option("--budget", match.budget, "nominal samples per move")->capture_default_str();
    s_match->add_option("--cost", match.cost, "hybrid sample cost")->capture_default_str();

    auto* s_cal = app.add_subcommand("mcts-calibrate", "hybrid against UCT over a (budget, cost) grid");
    add_common(s_cal, common);
    add_tree_options(s_cal, tree);
    s_cal->add_option("--budgets", calib.budgets, "comma-separated nominal budgets")->capture_default_str();
    s_cal->add_option("--costs", calib.costs, "comma-separated cost grid")->capture_default_str();

    try {
        auto args = expand_config(argc, argv);
        std::vector<char*> ptrs;
        for (auto& s : args) ptrs.push_back(s.data());
        try {
            app.parse(static_cast<int>(ptrs.size()), ptrs.data());
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);
        } catch (const CLI::CallForAllHelp& e) {
            return app.exit(e);
        } catch (const CLI::ParseError& e) {
            app.exit(e);
            return kExitValidation;
        }
        if (common.workers == 0) throw ValidationError("--workers must be positive");

        if (*s_one) return run_solve_one_armed(common, one);
        if (*s_blink) return run_build_blinkered(common, blink);
        if (*s_cost) return run_bench(common, bench_args, bench::SweepMode::Cost);
        if (*s_budget) return run_bench(common, bench_args, bench::SweepMode::Budget);
        if (*s_cx) return run_counterexample(common, cx);
        if (*s_match) return run_mcts_match(common, match, tree);
        if (*s_cal) return run_mcts_calibrate(common, calib, tree);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const bench::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitValidation;
}
