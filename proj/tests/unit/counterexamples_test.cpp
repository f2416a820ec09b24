#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "selcomp/counterexamples.hpp"
#include "support/oracles.hpp"

using namespace selcomp;
namespace cx = selcomp::counterexamples;

TEST(Indexability, GapsMatchDirectRecursion) {
    for (double lambda = -2.0; lambda <= 2.0 + 1e-9; lambda += 0.05) {
        const auto g = cx::example4_qgaps(lambda);
        const auto [o1, o2] = oracle::two_observation_gaps(lambda, 0.2, {-1.5, 1.5}, {0.25, 1.75});
        ASSERT_NEAR(g.observe_u1, o1, 1e-12) << lambda;
        ASSERT_NEAR(g.observe_u2, o2, 1e-12) << lambda;
    }
}

TEST(Indexability, LowContextFavoursTheWideArm) {
    // lambda <= 0.2: gaps are 0.05 and 0.0125.
    const auto g = cx::example4_qgaps(0.0);
    EXPECT_NEAR(g.observe_u1, 0.05, 1e-12);
    EXPECT_NEAR(g.observe_u2, 0.0125, 1e-12);
    const auto mid = cx::example4_qgaps(0.8);
    EXPECT_GT(mid.observe_u2, 0.0);
    EXPECT_GT(mid.observe_u2, mid.observe_u1);
}

TEST(Indexability, SweepFindsTheInversion) {
    const auto sweep = cx::example4_sweep(-2.0, 2.0, 0.05);
    EXPECT_EQ(sweep.rows.size(), 81u);
    EXPECT_TRUE(sweep.inversion);
    ASSERT_EQ(sweep.crossings.size(), 1u);
    EXPECT_NEAR(sweep.crossings[0], 0.4, 1e-9);
}

TEST(Indexability, CsvHasOneRowPerLambda) {
    const auto sweep = cx::example4_sweep(-1.0, 1.0, 0.5);
    std::stringstream ss;
    cx::write_indexability_csv(ss, sweep);
    std::string line;
    int lines = 0;
    while (std::getline(ss, line)) ++lines;
    EXPECT_EQ(lines, 6);
}

TEST(Unbounded, OddsRatio) {
    EXPECT_DOUBLE_EQ(cx::example3_odds_ratio(5, 2), 8.0);
    EXPECT_DOUBLE_EQ(cx::example3_odds_ratio(0, 3), 0.125);
    EXPECT_NEAR(cx::example3_mean_arm2(0), 0.5, 1e-15);
    EXPECT_NEAR(cx::example3_mean_arm2(1), (1.0 + 2.0 / 3.0) / 3.0, 1e-15);
}

TEST(Unbounded, ContinuationSetInsideTheBand) {
    const auto r = cx::example3_continuation(0.006);
    EXPECT_EQ(r.continuation, (std::set<int>{-1, 0, 1}));
    EXPECT_TRUE(r.stable);
    const auto ref = oracle::chain_continuation(0.006, 40, 5000);
    EXPECT_EQ(std::set<int>(ref.begin(), ref.end()), (std::set<int>{-1, 0, 1}));
}

TEST(Unbounded, ContinuationShrinksWithCost) {
    EXPECT_TRUE(cx::example3_continuation(0.05).continuation.empty());
    EXPECT_EQ(cx::example3_continuation(0.01).continuation, (std::set<int>{0}));
    const auto wide = cx::example3_continuation(0.001).continuation;
    EXPECT_GT(wide.size(), 3u);
}

TEST(Unbounded, BandGolden) {
    const auto band = cx::example3_band();
    EXPECT_NEAR(band.lower, 0.004357298582, 1e-9);
    EXPECT_NEAR(band.upper, 0.008547008539, 1e-9);
    // Either side of the band the set is different, by the independent chain solve.
    const auto above = oracle::chain_continuation(band.upper * 1.01, 40, 5000);
    const auto below = oracle::chain_continuation(band.lower * 0.99, 40, 5000);
    EXPECT_NE(std::set<int>(above.begin(), above.end()), (std::set<int>{-1, 0, 1}));
    EXPECT_NE(std::set<int>(below.begin(), below.end()), (std::set<int>{-1, 0, 1}));
}

TEST(Interval, OneArmedContinueSetIsAnInterval) {
    const auto grid = cx::uniform_grid(0.0, 1.0, 101);
    for (double c : {0.001, 0.005, 0.02})
        for (BetaCounts x : {BetaCounts{0, 0}, BetaCounts{3, 1}, BetaCounts{1, 6}}) {
            const auto r = cx::interval_property_check(grid, x, c);
            EXPECT_TRUE(r.contiguous);
            EXPECT_TRUE(r.contains_best_mean);
        }
}

TEST(Interval, SeveralArmsTruncated) {
    const auto grid = cx::uniform_grid(0.0, 1.0, 41);
    FlatTruncation t;
    t.max_additional_samples = 6;
    FlatState s(std::vector<BetaCounts>{{1, 0}, {0, 1}});
    const auto r = cx::interval_property_check(grid, s, 0.01, t);
    EXPECT_TRUE(r.contiguous);
    EXPECT_TRUE(r.contains_best_mean);
    EXPECT_TRUE(r.lo.has_value());
}

TEST(Interval, DetectsGapsInASyntheticPattern) {
    cx::IntervalCheck r;
    r.lambdas = {0.0, 0.25, 0.5, 0.75, 1.0};
    r.continues = {false, true, false, true, false};
    r.best_mean = 0.5;
    const auto checked = cx::detail::finish_interval_check(r);
    EXPECT_FALSE(checked.contiguous);
}
