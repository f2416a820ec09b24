#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "selcomp/core.hpp"
#include "selcomp/stats.hpp"

using namespace selcomp;

TEST(MetaAction, StopAndSampleAreDistinct) {
    EXPECT_TRUE(MetaAction::stop().is_stop());
    EXPECT_TRUE(MetaAction::sample(3).is_sample());
    EXPECT_EQ(MetaAction::sample(3).arm(), 3u);
    EXPECT_NE(MetaAction::stop(), MetaAction::sample(0));
    EXPECT_EQ(MetaAction::sample(2).to_string(), "sample(2)");
}

TEST(Rng, SameSeedSameStream) {
    Rng a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        EXPECT_EQ(x, b.next());
        differs |= x != c.next();
    }
    EXPECT_TRUE(differs);
}

TEST(Rng, UniformStaysInUnitInterval) {
    Rng r(1);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000.0, 0.5, 0.005);
}

TEST(Rng, BelowCoversRange) {
    Rng r(5);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 7000; ++i) ++hits[r.below(7)];
    for (int h : hits) EXPECT_GT(h, 800);
}

TEST(DeriveSeed, DependsOnEveryComponent) {
    EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
    EXPECT_NE(derive_seed(1, 2), derive_seed(2, 2));
    EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 2));
    EXPECT_EQ(derive_seed(9, 4, 1), derive_seed(derive_seed(9, 4), 1));
}

TEST(ParallelFor, ResultsIndependentOfWorkers) {
    auto run = [](std::size_t workers) {
        std::vector<double> out(500);
        parallel_for(out.size(), workers, [&](std::size_t i) {
            Rng r(derive_seed(7, i));
            out[i] = r.uniform();
        });
        return out;
    };
    EXPECT_EQ(run(1), run(4));
}

TEST(ParallelFor, PropagatesExceptions) {
    EXPECT_THROW(parallel_for(100, 3,
                              [](std::size_t i) {
                                  if (i == 37) throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}

TEST(Stats, MeanAndStandardError) {
    const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
    const auto e = estimate_mean(xs);
    EXPECT_DOUBLE_EQ(e.mean, 2.5);
    ASSERT_TRUE(e.se.has_value());
    // sample variance 5/3, se = sqrt(5/12)
    EXPECT_NEAR(*e.se, std::sqrt(5.0 / 12.0), 1e-15);
}

TEST(Stats, SingleObservationHasNoStandardError) {
    const std::vector<double> xs{0.3};
    const auto e = estimate_mean(xs);
    EXPECT_DOUBLE_EQ(e.mean, 0.3);
    EXPECT_FALSE(e.se.has_value());
    EXPECT_THROW(estimate_mean(std::vector<double>{}), std::invalid_argument);
}

TEST(Stats, PairedDifference) {
    const std::vector<double> a{1.0, 2.0, 3.0}, b{0.5, 2.5, 2.0};
    const auto d = paired_difference(a, b);
    EXPECT_NEAR(d.mean, (0.5 - 0.5 + 1.0) / 3.0, 1e-15);
}

TEST(Stats, WilsonIntervalContainsProportion) {
    const auto [lo, hi] = wilson_interval(30, 100, kZ95TwoSided);
    EXPECT_LT(lo, 0.3);
    EXPECT_GT(hi, 0.3);
    // Reference value for 30/100 at z = 1.96.
    EXPECT_NEAR(lo, 0.2189, 1e-3);
    EXPECT_NEAR(hi, 0.3958, 1e-3);
    const auto [l0, h0] = wilson_interval(0, 10, kZ95TwoSided);
    EXPECT_DOUBLE_EQ(l0, 0.0);
    EXPECT_GT(h0, 0.0);
}
