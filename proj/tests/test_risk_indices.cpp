#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cmte/errors.hpp"
#include "cmte/risk_indices.hpp"

using namespace cmte;

namespace {

const double kSqrt2OverPi = std::sqrt(2.0 / std::numbers::pi);

std::vector<double> alpha_grid() {
    std::vector<double> a;
    for (int i = 1; i <= 19; ++i) a.push_back(0.05 * i);
    return a;
}

}  // namespace

TEST(NormalCdf, ReferenceValues) {
    EXPECT_EQ(std_normal_cdf(0.0), 0.5);
    EXPECT_NEAR(std_normal_cdf(40.0), 1.0, 1e-12);
    EXPECT_NEAR(std_normal_cdf(1.0), 0.8413447460685429, 1e-14);
    EXPECT_NEAR(std_normal_cdf(-3.0), 0.0013498980316300946, 1e-16);
    EXPECT_NEAR(std_normal_cdf(-1.0), 0.15865525393145705, 1e-15);
    EXPECT_NEAR(std_normal_cdf(0.5), 0.6914624612740131, 1e-15);
    EXPECT_NEAR(std_normal_cdf(2.0), 0.9772498680518208, 1e-15);
}

TEST(NormalQuantile, ReferenceValues) {
    EXPECT_EQ(std_normal_quantile(0.5), 0.0);
    EXPECT_NEAR(std_normal_quantile(0.8), 0.8416212335729144, 1e-12);
    EXPECT_NEAR(std_normal_quantile(0.9), 1.2815515655446006, 1e-12);
    EXPECT_NEAR(std_normal_quantile(0.95), 1.6448536269514722, 1e-12);
    EXPECT_NEAR(std_normal_quantile(0.975), 1.9599639845400538, 1e-12);
    EXPECT_NEAR(std_normal_quantile(0.05), -1.6448536269514726, 1e-12);
    EXPECT_NEAR(std_normal_quantile(1e-6), -4.753424308822899, 1e-10);
}

TEST(NormalQuantile, RoundTrip) {
    for (int i = 1; i <= 99; ++i) {
        const double p = i / 100.0;
        EXPECT_NEAR(std_normal_cdf(std_normal_quantile(p)), p, 1e-10);
    }
}

TEST(NormalQuantile, DomainErrors) {
    EXPECT_THROW(std_normal_quantile(0.0), DomainError);
    EXPECT_THROW(std_normal_quantile(1.0), DomainError);
    EXPECT_THROW(std_normal_quantile(std::nan("")), DomainError);
}

TEST(RiskProfile, Validation) {
    EXPECT_NO_THROW(RiskProfile(0.9, 0.0));
    EXPECT_NO_THROW(RiskProfile(0.9, 1.0));
    EXPECT_THROW(RiskProfile(1.0, 0.5), DomainError);
    EXPECT_THROW(RiskProfile(0.0, 0.5), DomainError);
    EXPECT_THROW(RiskProfile(0.9, -0.1), DomainError);
    EXPECT_THROW(RiskProfile(0.9, 1.1), DomainError);
}

TEST(TailIndices, ClosedFormReference) {
    struct Case {
        double mu, sigma, alpha, below, excess, budget;
    };
    const Case cases[] = {
        {20, 3, 0.9, 19.415005560225044, 25.264949957974604, 23.844654696633803},
        {15, 5, 0.8, 13.2502379974512, 21.99904801019521, 19.20810616786457},
        {30, 1, 0.95, 29.891436168025926, 32.062712807507424, 31.644853626951473},
    };
    for (const Case& c : cases) {
        EXPECT_NEAR(mbtt(c.mu, c.sigma, c.alpha), c.below, 1e-11);
        EXPECT_NEAR(mett(c.mu, c.sigma, c.alpha), c.excess, 1e-11);
        EXPECT_NEAR(ttb(c.mu, c.sigma, c.alpha), c.budget, 1e-11);
    }
}

TEST(TailIndices, ZeroSigmaAndMedian) {
    for (double a : alpha_grid()) {
        EXPECT_EQ(ttb(12, 0, a), 12.0);
        EXPECT_EQ(mbtt(12, 0, a), 12.0);
        EXPECT_EQ(mett(12, 0, a), 12.0);
    }
    EXPECT_EQ(ttb(12, 3, 0.5), 12.0);
}

TEST(TailIndices, MedianCoefficients) {
    const RiskProfile half(0.5, 0.5);
    EXPECT_NEAR(risk_coefficient(IndexKind::MBTT, half), -kSqrt2OverPi, 1e-12);
    EXPECT_NEAR(risk_coefficient(IndexKind::METT, half), kSqrt2OverPi, 1e-12);
    EXPECT_EQ(risk_coefficient(IndexKind::PTT_TTB, half), 0.0);
    EXPECT_EQ(risk_coefficient(IndexKind::MTT, half), 0.0);
    EXPECT_NEAR(mbtt(10, 2, 0.5), 10 - 2 * kSqrt2OverPi, 1e-12);
    EXPECT_NEAR(mett(10, 2, 0.5), 10 + 2 * kSqrt2OverPi, 1e-12);
}

TEST(TailIndices, RecombineToMeanOverGrid) {
    for (double mu : {1.0, 10.0, 100.0})
        for (double s : {0.0, 1.0, 10.0})
            for (double a : alpha_grid())
                EXPECT_NEAR(a * mbtt(mu, s, a) + (1 - a) * mett(mu, s, a), mu, 1e-10);
}

TEST(TailIndices, Ordering) {
    for (double a : alpha_grid()) {
        EXPECT_LT(mbtt(50, 4, a), 50.0);
        EXPECT_GT(mett(50, 4, a), 50.0);
        if (a >= 0.5) {
            EXPECT_LE(mbtt(50, 4, a), ttb(50, 4, a));
            EXPECT_LE(ttb(50, 4, a), mett(50, 4, a));
        }
    }
}

TEST(Cmtt, RiskNeutralAtLambdaEqualsAlpha) {
    for (double mu : {1.0, 10.0, 100.0})
        for (double s : {0.0, 1.0, 10.0})
            for (double a : alpha_grid()) {
                const RiskProfile r(a, a);
                EXPECT_NEAR(cmtt(mu, s, r), mu, 1e-12);
                EXPECT_EQ(risk_coefficient(IndexKind::CMTT, r), 0.0);
            }
    EXPECT_EQ(cmtt(20, 3, RiskProfile(0.9, 0.9)), 20.0);
}

TEST(Cmtt, EndpointsAndConvexCombination) {
    for (double a : alpha_grid()) {
        EXPECT_NEAR(cmtt(20, 3, RiskProfile(a, 0)), mett(20, 3, a), 1e-12);
        EXPECT_NEAR(cmtt(20, 3, RiskProfile(a, 1)), mbtt(20, 3, a), 1e-12);
        for (double l : {0.1, 0.25, 0.5, 0.75}) {
            const double combo = l * mbtt(20, 3, a) + (1 - l) * mett(20, 3, a);
            EXPECT_NEAR(cmtt(20, 3, RiskProfile(a, l)), combo, 1e-12 * combo);
        }
    }
}

TEST(Cmtt, StrictlyDecreasingInLambda) {
    double prev = cmtt(20, 3, RiskProfile(0.9, 0.0));
    for (int i = 1; i <= 20; ++i) {
        const double cur = cmtt(20, 3, RiskProfile(0.9, i / 20.0));
        EXPECT_LT(cur, prev);
        prev = cur;
    }
}

TEST(RiskCoefficient, ReproducesEachIndex) {
    const RiskProfile r(0.9, 0.3);
    const double mu = 40, s = 6;
    EXPECT_NEAR(reliability_index(IndexKind::MTT, mu, s, r), mu, 1e-12 * mu);
    EXPECT_NEAR(reliability_index(IndexKind::PTT_TTB, mu, s, r), ttb(mu, s, 0.9), 1e-12 * mu);
    EXPECT_NEAR(reliability_index(IndexKind::MBTT, mu, s, r), mbtt(mu, s, 0.9), 1e-12 * mu);
    EXPECT_NEAR(reliability_index(IndexKind::METT, mu, s, r), mett(mu, s, 0.9), 1e-12 * mu);
    EXPECT_NEAR(reliability_index(IndexKind::CMTT, mu, s, r), cmtt(mu, s, r), 1e-12 * mu);
}

TEST(IndexKind, NamesRoundTrip) {
    for (IndexKind k : {IndexKind::MTT, IndexKind::PTT_TTB, IndexKind::MBTT, IndexKind::METT,
                        IndexKind::CMTT})
        EXPECT_EQ(parse_index_kind(to_string(k)), k);
    EXPECT_EQ(parse_index_kind("cmtt"), IndexKind::CMTT);
    EXPECT_THROW(parse_index_kind("nope"), ConfigError);
}
