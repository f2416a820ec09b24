#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "selcomp/voi.hpp"
#include "support/oracles.hpp"

using namespace selcomp;

namespace {

std::vector<ArmStats> stats_of(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& sn) {
    std::vector<ArmStats> out;
    for (auto [s, n] : sn) out.push_back(ArmStats::from_mean(n, static_cast<double>(s) / static_cast<double>(n)));
    return out;
}

}  // namespace

TEST(Voi, PhiConstant) {
    EXPECT_NEAR(kVoiPhi, 24.0 - 16.0 * std::sqrt(2.0), 1e-12);
}

TEST(Voi, TailOracleHandValue) {
    // Counts (1, 1): Beta-Binomial(2; 2, 2) has pmf 0.3, 0.4, 0.3.
    const auto pmf = oracle::beta_binomial_pmf(1, 1, 2);
    EXPECT_NEAR(pmf[0], 0.3, 1e-14);
    EXPECT_NEAR(pmf[1], 0.4, 1e-14);
    EXPECT_NEAR(pmf[2], 0.3, 1e-14);
    EXPECT_NEAR(oracle::exact_tail_oracle(1, 1, 2, 0.5, true), 0.7, 1e-14);
    EXPECT_NEAR(oracle::exact_tail_oracle(1, 1, 2, 0.5, false), 0.7, 1e-14);
}

TEST(Voi, AlphaAndBetaSelection) {
    const auto st = stats_of({{1, 2}, {3, 4}, {3, 4}, {0, 1}});
    const VoiContext ctx(st, 10);
    EXPECT_EQ(ctx.alpha(), 1u);
    EXPECT_EQ(ctx.beta(), 2u);
    EXPECT_TRUE(ctx.has_competitor());
    const auto one = stats_of({{1, 2}});
    EXPECT_FALSE(VoiContext(one, 5).has_competitor());
    std::vector<ArmStats> empty_arm(2);
    EXPECT_THROW(VoiContext(empty_arm, 5), std::invalid_argument);
}

TEST(Voi, HoeffdingBoundHandValue) {
    // Means 0.5 (n = 2) and 0.25 (n = 4), N = 10.
    const auto st = stats_of({{1, 2}, {1, 4}});
    const VoiContext ctx(st, 10);
    const double phi = 24.0 - 16.0 * std::sqrt(2.0);
    const double alpha_bound = 10.0 * 0.25 / 2.0 * 2.0 * std::exp(-phi * 0.0625 * 2.0);
    const double other_bound = 10.0 * 0.5 / 4.0 * 2.0 * std::exp(-phi * 0.0625 * 4.0);
    EXPECT_NEAR(voi_bound_hoeffding(ctx, 0), alpha_bound, 1e-14);
    EXPECT_NEAR(voi_bound_hoeffding(ctx, 1), other_bound, 1e-14);
    EXPECT_EQ(voi_select(ctx, VoiVariant::Hoeffding), alpha_bound > other_bound ? 0u : 1u);
}

TEST(Voi, ErfBoundHandValue) {
    const auto st = stats_of({{1, 2}, {1, 4}});
    const VoiContext ctx(st, 10);
    const double pi = std::numbers::pi;
    auto erf_term = [&](double n, double a, double gap) {
        return 10.0 * std::sqrt(pi) / (n * std::sqrt(n)) * (std::erf(a * std::sqrt(n / pi)) - std::erf(gap * std::sqrt(n / pi)));
    };
    EXPECT_NEAR(voi_bound_erf(ctx, 0), erf_term(2.0, 0.5, 0.25), 1e-14);
    EXPECT_NEAR(voi_bound_erf(ctx, 1), erf_term(4.0, 0.75, 0.25), 1e-14);
}

TEST(Voi, EqualMeansGiveTheUnattenuatedBound) {
    // Two arms at mean 1/2 with one sample each, N = 1: the crossing bound is 2.
    const auto st = stats_of({{1, 2}, {1, 2}});
    const VoiContext ctx(st, 1);
    EXPECT_DOUBLE_EQ(crossing_probability_bound(ctx, 0), 2.0);
    EXPECT_DOUBLE_EQ(voi_bound_hoeffding(ctx, 0), 1.0 * 0.5 / 2.0 * 2.0);
}

TEST(Voi, SingleArmHasNoValue) {
    const auto st = stats_of({{3, 5}});
    const VoiContext ctx(st, 100);
    EXPECT_EQ(voi_bound_hoeffding(ctx, 0), 0.0);
    EXPECT_EQ(voi_bound_erf(ctx, 0), 0.0);
    EXPECT_TRUE(should_stop(ctx, 1e-9));
}

TEST(Voi, BoundsDominateExactGain) {
    Rng r(41);
    int checked = 0;
    for (int it = 0; it < 3000; ++it) {
        const std::size_t k = 2 + r.below(3);
        std::vector<oracle::Counts> counts;
        std::vector<ArmStats> st;
        for (std::size_t i = 0; i < k; ++i) {
            const std::uint64_t n = 1 + r.below(15);
            const std::uint64_t s = r.below(n + 1);
            counts.push_back({s, n});
            st.push_back(ArmStats::from_mean(n, static_cast<double>(s) / static_cast<double>(n)));
        }
        const int N = 1 + static_cast<int>(r.below(10));
        const VoiContext ctx(st, static_cast<std::uint64_t>(N));
        for (std::size_t i = 0; i < k; ++i) {
            const double exact = oracle::exact_voi(counts, i, N);
            ASSERT_GE(voi_bound_hoeffding(ctx, i), exact - 1e-12);
            ASSERT_GE(voi_bound_erf(ctx, i), exact - 1e-12);
            ASSERT_GE(voi_bound_hoeffding(ctx, i), oracle::exact_crossing_term(counts, i, N) - 1e-12);
            ++checked;
        }
    }
    EXPECT_GT(checked, 6000);
}

TEST(Voi, StoppingTestHandValue) {
    const auto st = stats_of({{1, 2}, {1, 4}});
    const VoiContext ctx(st, 10);
    const double alpha_term = voi_bound_hoeffding(ctx, 0) / 10.0;
    const double other_term = voi_bound_hoeffding(ctx, 1) / 10.0;
    const double threshold = std::max(alpha_term, other_term);
    EXPECT_FALSE(should_stop(ctx, threshold * 0.999));
    EXPECT_TRUE(should_stop(ctx, threshold * 1.001));
    EXPECT_FALSE(should_stop(ctx, 0.0));
    EXPECT_TRUE(should_stop(ctx, 2.0));
}

TEST(VoiSampling, RoundRobinThenBudget) {
    const auto run = run_voi_policy({0.2, 0.5, 0.8}, 40, VoiVariant::Hoeffding, 3);
    ASSERT_EQ(run.trace.size(), 40u);
    EXPECT_EQ(run.trace[0], 0u);
    EXPECT_EQ(run.trace[1], 1u);
    EXPECT_EQ(run.trace[2], 2u);
    EXPECT_EQ(run.samples_used, 40u);
    std::uint64_t total = 0;
    for (const auto& a : run.stats) total += a.n();
    EXPECT_EQ(total, 40u);
    EXPECT_THROW(run_voi_policy({0.2, 0.5, 0.8}, 2, VoiVariant::Hoeffding, 3), std::invalid_argument);
}

TEST(VoiSampling, HugeCostStopsAfterRoundRobin) {
    const auto run = run_voi_policy({0.2, 0.5, 0.8, 0.4}, 500, VoiVariant::Erf, 5, 2.0);
    EXPECT_EQ(run.samples_used, 4u);
}

TEST(VoiSampling, ZeroCostNeverStopsEarly) {
    const auto run = run_voi_policy({0.2, 0.5}, 300, VoiVariant::Hoeffding, 5, 0.0);
    EXPECT_EQ(run.samples_used, 300u);
}

TEST(VoiSampling, SelectsHighestSampleMean) {
    const auto run = run_voi_policy({0.1, 0.9, 0.3}, 200, VoiVariant::Hoeffding, 8);
    std::size_t best = 0;
    for (std::size_t i = 1; i < run.stats.size(); ++i)
        if (run.stats[i].mean() > run.stats[best].mean()) best = i;
    EXPECT_EQ(run.selected, best);
    EXPECT_EQ(run.selected, 1u);
}

TEST(VoiSampling, PseudoCountsEnterStatisticsButNotBudget) {
    const auto run = run_voi_policy({0.2, 0.5}, 50, VoiVariant::Hoeffding, 5, std::nullopt, VoiPrior{2, 0.5});
    EXPECT_EQ(run.samples_used, 50u);
    EXPECT_EQ(run.stats[0].n() + run.stats[1].n(), 54u);
}

TEST(VoiSampling, DeterministicPerSeed) {
    const auto a = run_voi_policy({0.3, 0.35, 0.6, 0.55}, 300, VoiVariant::Erf, 77);
    const auto b = run_voi_policy({0.3, 0.35, 0.6, 0.55}, 300, VoiVariant::Erf, 77);
    EXPECT_EQ(a.trace, b.trace);
}
