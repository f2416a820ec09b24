#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "selcomp/bench.hpp"

using namespace selcomp;
using namespace selcomp::bench;

namespace {

ExperimentConfig small_cost_config() {
    ExperimentConfig c;
    c.k = 5;
    c.trials = 40;
    c.costs = {0.02, 0.005};
    c.grid_points = 17;
    c.seed = 3;
    return c;
}

ExperimentConfig small_budget_config() {
    ExperimentConfig c;
    c.k = 5;
    c.mode = SweepMode::Budget;
    c.trials = 40;
    c.budgets = {5, 40, 160};
    c.seed = 3;
    return c;
}

std::string summary_csv(const std::vector<RegretRecord>& recs) {
    std::stringstream ss;
    write_summary_csv(ss, summarize(recs));
    return ss.str();
}

}  // namespace

TEST(Config, Validation) {
    auto c = small_cost_config();
    EXPECT_NO_THROW(validate(c));
    c.policies = {"UCB1"};
    EXPECT_THROW(validate(c), ConfigError);
    c.policies = {"nonsense"};
    EXPECT_THROW(validate(c), ConfigError);
    c = small_cost_config();
    c.costs = {};
    EXPECT_THROW(validate(c), ConfigError);
    c = small_budget_config();
    c.budgets = {3};
    EXPECT_THROW(validate(c), ConfigError);
    c = small_budget_config();
    c.policies = {"blinkered"};
    EXPECT_THROW(validate(c), ConfigError);
}

TEST(Config, JsonRoundTrip) {
    auto c = small_budget_config();
    c.regret = RegretConvention::Realized;
    const auto j = to_json(c);
    EXPECT_EQ(j["schema"], kConfigSchema);
    const auto back = config_from_json(j);
    EXPECT_EQ(back.k, c.k);
    EXPECT_EQ(back.mode, c.mode);
    EXPECT_EQ(back.budgets, c.budgets);
    EXPECT_EQ(back.trials, c.trials);
    EXPECT_EQ(back.regret, RegretConvention::Realized);
    EXPECT_EQ(back.effective_policies(), c.effective_policies());
}

TEST(Config, JsonErrors) {
    EXPECT_THROW(config_from_json(nlohmann::json::array()), ConfigError);
    EXPECT_THROW(config_from_json({{"k", 3}}), ConfigError);
    EXPECT_THROW(config_from_json({{"schema", kConfigSchema}, {"bogus", 1}}), ConfigError);
    EXPECT_THROW(config_from_json({{"schema", kConfigSchema}, {"k", "many"}}), ConfigError);
    EXPECT_THROW(config_from_json({{"schema", kConfigSchema}, {"mode", "sideways"}}), ConfigError);
}

TEST(CostSweep, HugeCostSelectsByPrior) {
    auto c = small_cost_config();
    c.costs = {1.0};
    const auto recs = run_cost_sweep(c);
    for (const auto& r : recs) {
        EXPECT_EQ(r.samples, 0u);
        EXPECT_EQ(r.selected, 0u);  // all prior means tie; lowest index
        const auto truth = sample_truth(c.k, derive_seed(c.seed, r.trial, 0));
        EXPECT_DOUBLE_EQ(r.regret, *std::max_element(truth.begin(), truth.end()) - truth[0]);
    }
}

TEST(CostSweep, PairedTruthAndAccounting) {
    const auto c = small_cost_config();
    const auto recs = run_cost_sweep(c);
    EXPECT_EQ(recs.size(), 2u * 40u * 4u);
    for (const auto& r : recs) {
        const auto truth = sample_truth(c.k, derive_seed(c.seed, r.trial, 0));
        EXPECT_NEAR(r.regret, regret(truth, r.selected, r.samples, r.param), 1e-15);
    }
}

TEST(CostSweep, DeterministicAcrossWorkers) {
    auto c = small_cost_config();
    const auto a = summary_csv(run_cost_sweep(c));
    c.workers = 3;
    const auto b = summary_csv(run_cost_sweep(c));
    EXPECT_EQ(a, b);
}

TEST(BudgetSweep, UsesExactlyTheBudget) {
    const auto recs = run_budget_sweep(small_budget_config());
    for (const auto& r : recs) EXPECT_EQ(static_cast<double>(r.samples), r.param);
}

TEST(BudgetSweep, BudgetEqualToKIsOneSamplePerArm) {
    auto c = small_budget_config();
    c.budgets = {5};
    const auto recs = run_budget_sweep(c);
    for (std::size_t t = 0; t < c.trials; ++t) {
        std::vector<std::size_t> sel;
        for (const auto& r : recs)
            if (r.trial == t) sel.push_back(r.selected);
        ASSERT_EQ(sel.size(), 3u);
        EXPECT_EQ(sel[0], sel[1]);
        EXPECT_EQ(sel[1], sel[2]);
    }
}

TEST(BudgetSweep, DeterministicAcrossWorkers) {
    auto c = small_budget_config();
    const auto a = summary_csv(run_budget_sweep(c));
    c.workers = 4;
    EXPECT_EQ(a, summary_csv(run_budget_sweep(c)));
}

TEST(BudgetSweep, RealizedRegretUsesDrawnUtilities) {
    auto c = small_budget_config();
    c.regret = RegretConvention::Realized;
    for (const auto& r : run_budget_sweep(c)) {
        EXPECT_TRUE(r.regret == 0.0 || r.regret == 1.0 || r.regret == -1.0);
    }
}

TEST(Summary, HandComputedMeans) {
    std::vector<RegretRecord> recs{{"a", 1.0, 0, 0, 4, 0.5, 0.0},
                                   {"a", 1.0, 1, 0, 6, 1.5, 0.0},
                                   {"b", 1.0, 0, 0, 2, 0.25, 0.0}};
    const auto rows = summarize(recs);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].policy, "a");
    EXPECT_DOUBLE_EQ(rows[0].mean_regret, 1.0);
    ASSERT_TRUE(rows[0].se.has_value());
    EXPECT_NEAR(*rows[0].se, 0.5, 1e-15);
    EXPECT_DOUBLE_EQ(rows[0].mean_samples, 5.0);
    EXPECT_FALSE(rows[1].se.has_value());
    std::stringstream ss;
    write_summary_csv(ss, rows);
    EXPECT_EQ(ss.str(),
              "policy,sweep_param,mean_regret,se,trials,mean_samples\n"
              "a,1,1,0.5,2,5\n"
              "b,1,0.25,,1,2\n");
}

TEST(Summary, StableUnderShuffling) {
    auto recs = run_budget_sweep(small_budget_config());
    const auto a = summary_csv(recs);
    std::mt19937 g(5);
    std::shuffle(recs.begin(), recs.end(), g);
    EXPECT_EQ(a, summary_csv(recs));
    EXPECT_THROW(summarize(std::vector<RegretRecord>{}), std::invalid_argument);
}

TEST(Summary, CellRegretsAreOrderedByTrial) {
    std::vector<RegretRecord> recs{{"a", 2.0, 1, 0, 0, 0.7, 0.0}, {"a", 2.0, 0, 0, 0, 0.3, 0.0}};
    EXPECT_EQ(cell_regrets(recs, "a", 2.0), (std::vector<double>{0.3, 0.7}));
}

TEST(Plot, SvgContainsOneLinePerPolicy) {
    const auto rows = summarize(run_budget_sweep(small_budget_config()));
    std::stringstream ss;
    write_svg_plot(ss, rows, false, "budget");
    const auto svg = ss.str();
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    std::size_t lines = 0;
    for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++lines;
    EXPECT_EQ(lines, 3u);
}
