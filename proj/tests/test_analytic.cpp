#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bsec/bsec.hpp"

using namespace bsec;

namespace {
constexpr double kE = std::numbers::e;
constexpr double kInvE = 1.0 / std::numbers::e;

// Textbook evaluation of S^B(w), fine where nothing cancels badly.
double s_sum_naive(double w, int B) {
    const double x = std::log(1 / w);
    double total = 0.0;
    for (int b = 0; b <= B; ++b) {
        double partial = 0.0, term = 1.0;
        for (int l = 0; l <= b; ++l) {
            partial += term;
            term *= x / (l + 1);
        }
        total += 1 / w - partial;
    }
    return total;
}
} // namespace

TEST(PoissonTail, MatchesDirectSum) {
    for (double x : {0.01, 0.5, 1.0, 3.0, 12.0})
        for (int b = 0; b < 25; ++b) {
            double cdf = 0.0, term = std::exp(-x);
            for (int l = 0; l <= b; ++l) {
                cdf += term;
                term *= x / (l + 1);
            }
            EXPECT_NEAR(poisson_upper_tail(b, x), 1.0 - cdf, 1e-14) << x << ' ' << b;
        }
    EXPECT_EQ(poisson_upper_tail(3, 0.0), 0.0);
}

TEST(SSum, Examples) {
    for (int B : {0, 1, 5, 50}) EXPECT_EQ(s_sum(1.0, B), 0.0);
    EXPECT_NEAR(s_sum(kInvE, 0), kE - 1, 1e-12);
    EXPECT_NEAR(s_sum(kInvE, 200), kE, 1e-9);
    EXPECT_THROW(s_sum(0.0, 1), DomainError);
    EXPECT_THROW(s_sum(1.5, 1), DomainError);
}

TEST(SSum, AgreesWithTextbookForm) {
    for (double w : {0.05, 0.2, kInvE, 0.7, 0.95})
        for (int B = 0; B <= 6; ++B) EXPECT_NEAR(s_sum(w, B), s_sum_naive(w, B), 1e-10 * (1 + s_sum_naive(w, B)));
}

TEST(SSum, MonotoneAndBounded) {
    for (int i = 1; i <= 100; ++i) {
        const double w = i / 100.0;
        double prev = -1.0;
        for (int B = 0; B <= 15; ++B) {
            const double s = s_sum(w, B);
            EXPECT_GE(s, prev);
            EXPECT_GE(s, 0.0);
            EXPECT_LE(s, std::log(1 / w) / w + 1e-12);
            prev = s;
        }
    }
}

TEST(SingleThresholdLimit, Examples) {
    EXPECT_NEAR(single_threshold_limit(2, kInvE, 0), kInvE * (1 - kInvE), 1e-12);
    EXPECT_NEAR(single_threshold_limit(2, kInvE, 200), kInvE, 1e-9);
    for (int K : {2, 3, 7}) EXPECT_EQ(single_threshold_limit(K, 1.0, 4), 0.0);
    EXPECT_THROW(single_threshold_limit(1, 0.3, 0), DomainError);
    EXPECT_THROW(single_threshold_limit(2, 0.0, 0), DomainError);
}

TEST(SingleThresholdLimit, NoBudgetClosedForm) {
    // B = 0: (alpha - alpha^K) / (K - 1).
    for (int K : {2, 3, 5, 10})
        for (double a : {0.1, 0.3, 0.6, 0.9})
            EXPECT_NEAR(single_threshold_limit(K, a, 0), (a - std::pow(a, K)) / (K - 1), 1e-13);
}

TEST(SingleThresholdLimit, MatchesSSumForm) {
    for (int K : {2, 3, 4})
        for (double a : {0.2, 0.5, 0.8})
            for (int B = 0; B <= 4; ++B)
                EXPECT_NEAR(single_threshold_limit(K, a, B),
                            std::pow(a, K) / (K - 1) * s_sum(std::pow(a, K - 1), B), 1e-12);
}

TEST(SingleThresholdLimit, UnlimitedBudget) {
    for (double a : {0.2, kInvE, 0.5, 0.8}) {
        EXPECT_NEAR(single_threshold_limit(2, a, 200), classical_limit(a), 1e-9);
        EXPECT_NEAR(single_threshold_limit(4, a, 400), classical_limit(a), 1e-9);
    }
}

TEST(SingleThresholdLimit, TinyAlphaLargeK) {
    const double v = single_threshold_limit(50, 1e-8, 3);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(v, 0.0);
}

TEST(SingleThresholdBound, Examples) {
    EXPECT_NEAR(single_threshold_bound(2, 0), 0.0, 1e-15);
    EXPECT_NEAR(single_threshold_bound(2, 1), 1 / (2 * kE), 1e-15);
    EXPECT_NEAR(single_threshold_bound(2, 3), kInvE * (1 - 1.0 / 24), 1e-15);
    EXPECT_GE(single_threshold_limit(2, kInvE, 3), single_threshold_bound(2, 3));
}

TEST(OptimalSingleAlpha, ConvergesToInverseE) {
    EXPECT_NEAR(optimal_single_alpha(2, 50).alpha, kInvE, 1e-3);
    const auto k1 = optimal_single_alpha(1, 0);
    EXPECT_EQ(k1.alpha, kInvE);
    EXPECT_EQ(k1.value, kInvE);
}

TEST(OptimalSingleAlpha, BeatsDenseGrid) {
    for (int K : {2, 3, 10})
        for (int B : {0, 1, 3}) {
            const auto opt = optimal_single_alpha(K, B);
            double best = -1, arg = 0;
            for (int i = 1; i <= 20000; ++i) {
                const double v = single_threshold_limit(K, i / 20000.0, B);
                if (v > best) { best = v; arg = i / 20000.0; }
            }
            EXPECT_GE(opt.value, best - 1e-10) << K << ' ' << B;
            EXPECT_NEAR(opt.alpha, arg, 1e-3) << K << ' ' << B;
            EXPECT_NEAR(opt.value, single_threshold_limit(K, opt.alpha, B), 1e-15);
        }
    // No budget, K groups: alpha* = K^(-1/(K-1)).
    EXPECT_NEAR(optimal_single_alpha(10, 0).alpha, std::pow(10.0, -1.0 / 9), 1e-6);
}

TEST(PhiGrid, BoundaryNodes) {
    const double a = 0.3, b = 0.6, lam = 0.4;
    const auto g = phi_grid(a, b, lam, 3);
    EXPECT_EQ(g.m(), 512);
    EXPECT_EQ(g.grid.front(), a);
    EXPECT_EQ(g.grid.back(), b);
    for (int B = 0; B <= 3; ++B) {
        EXPECT_NEAR(g.values[B].back(), (1 - lam) * b * b * s_sum(b, B), 1e-14);
        EXPECT_NEAR(g.values1[B].back(), lam * b * b * s_sum(b, B), 1e-14);
    }
}

TEST(PhiGrid, NoBudgetClosedForm) {
    const double a = 0.25, b = 0.7, lam = 0.6;
    const auto g = phi_grid(a, b, lam, 0, 64);
    for (int i = 0; i <= 64; ++i) {
        const double w = g.grid[i];
        const double expect = -lam * w * std::log((1 - lam) * w / b + lam) +
                              (1 - lam) * b * w * w * s_sum(b, 0) / ((1 - lam) * w + lam * b);
        EXPECT_NEAR(g.values[0][i], expect, 1e-15);
    }
}

TEST(PhiGrid, ValuesAreProbabilities) {
    for (double lam : {0.2, 0.5, 0.9}) {
        const auto g = phi_grid(0.2, 0.8, lam, 4);
        for (const auto* table : {&g.values, &g.values1})
            for (const auto& row : *table)
                for (double v : row) {
                    EXPECT_GE(v, 0.0);
                    EXPECT_LE(v, 1.0);
                }
    }
}

TEST(PhiGrid, QuadratureConverges) {
    const auto coarse = phi_grid(0.3, 0.5, 0.5, 2, 512);
    const auto fine = phi_grid(0.3, 0.5, 0.5, 2, 1024);
    EXPECT_LT(std::abs(coarse.values[2].front() - fine.values[2].front()), 1e-6);
    EXPECT_LT(std::abs(double_threshold_limit(0.2, 0.9, 0.7, 3, 512) - double_threshold_limit(0.2, 0.9, 0.7, 3, 1024)), 1e-6);
}

TEST(PhiGrid, RejectsBadInput) {
    EXPECT_THROW(phi_grid(0.5, 0.4, 0.5, 1), DomainError);
    EXPECT_THROW(phi_grid(0.0, 0.4, 0.5, 1), DomainError);
    EXPECT_THROW(phi_grid(0.2, 0.4, 1.0, 1), DomainError);
    EXPECT_THROW(phi_grid(0.2, 0.4, 0.5, 1, 32), DomainError);
}

TEST(DoubleThresholdLimit, EqualThresholdsReduceToSingle) {
    for (double lam : {0.3, 0.7})
        for (int B = 0; B <= 3; ++B)
            for (int i = 1; i <= 10; ++i) {
                const double a = i / 10.0;
                EXPECT_NEAR(double_threshold_limit(a, a, lam, B), single_threshold_limit(2, a, B), 1e-10);
                EXPECT_NEAR(double_threshold_limit(a, a, lam, B), a * a * s_sum(a, B), 1e-10);
            }
}

TEST(DoubleThresholdLimit, CorollaryPairNoBudget) {
    const double lam = 0.5;
    EXPECT_NEAR(double_threshold_limit(lam * std::exp(1 / lam - 2), lam, lam, 0), 0.25, 1e-12);
    const double l7 = 0.7;
    EXPECT_NEAR(double_threshold_limit(l7 * std::exp(1 / l7 - 2), l7, l7, 0), l7 * l7 * std::exp(1 / l7 - 2), 1e-12);
}

TEST(DoubleThresholdLimit, TwoRoutesAgree) {
    for (double lam : {0.3, 0.5, 0.8})
        for (int B = 0; B <= 3; ++B) {
            const double a = double_threshold_limit(0.25, 0.6, lam, B);
            const double b = double_threshold_limit_via_phi(0.25, 0.6, lam, B);
            EXPECT_NEAR(a, b, 1e-6) << lam << ' ' << B;
        }
}

TEST(DoubleThresholdLimit, BoundedByInverseE) {
    for (double lam : {0.1, 0.5, 0.9})
        for (int B = 0; B <= 4; ++B)
            for (double a : {0.1, 0.3, 0.5})
                for (double b : {0.5, 0.7, 1.0}) {
                    const double v = double_threshold_limit(a, b, lam, B);
                    EXPECT_GE(v, 0.0);
                    EXPECT_LE(v, kInvE + 1e-9);
                }
}

TEST(DoubleThresholdLimit, FrozenValues) {
    // Adaptive-quadrature evaluation of the nested integrals (scipy quad, tol 1e-13).
    EXPECT_NEAR(double_threshold_limit(0.3, 0.5, 0.5, 0), 0.22662384356489862, 1e-12);
    EXPECT_NEAR(double_threshold_limit(0.3, 0.5, 0.5, 1), 0.315080921401797, 1e-6);
    EXPECT_NEAR(double_threshold_limit(0.3, 0.5, 0.5, 2), 0.34537107772868836, 1e-6);
    EXPECT_NEAR(double_threshold_limit(0.2, 0.9, 0.7, 2), 0.28916339272596114, 1e-6);
    EXPECT_NEAR(double_threshold_limit(0.3, 0.4, 0.5, 1), 0.3201881116403016, 1e-6);
}

TEST(CorollaryThresholds, NoBudgetPair) {
    for (double lam : {0.5, 0.6, 0.7, 0.9}) {
        const auto r = corollary_thresholds(lam, 0);
        EXPECT_NEAR(r.thresholds.alpha, lam * std::exp(1 / lam - 2), 1e-6);
        EXPECT_NEAR(r.thresholds.beta, lam, 1e-6);
    }
    const auto half = corollary_thresholds(0.5, 0);
    EXPECT_NEAR(half.objective, 0.25, 1e-9);
    EXPECT_NEAR(half.lower_bound, kInvE - (4 / kE - 1) * 0.25, 1e-15);
}

TEST(CorollaryThresholds, LimitAboveBound) {
    for (double lam : {0.5, 0.6, 0.7, 0.9})
        for (int B = 0; B <= 3; ++B) {
            const auto r = corollary_thresholds(lam, B);
            EXPECT_LE(r.thresholds.alpha, r.thresholds.beta);
            EXPECT_GE(double_threshold_limit(r.thresholds.alpha, r.thresholds.beta, lam, B), r.lower_bound - 1e-6)
                << lam << ' ' << B;
        }
    EXPECT_THROW(corollary_thresholds(0.4, 0), DomainError);
}

TEST(SumExpRemainder, Examples) {
    for (auto [x, B] : {std::pair{1.0, 1}, std::pair{0.001, 1}, std::pair{3.0, 10}}) {
        const auto r = sum_exp_remainder_check(x, B);
        EXPECT_TRUE(r.lower_ok);
        EXPECT_TRUE(r.upper_ok);
    }
    EXPECT_LT(sum_exp_remainder_check(0.001, 1).gap, 1e-9);
}

TEST(SumExpRemainder, GapMatchesSSum) {
    // gap = x e^x - S^B(e^{-x}).
    for (double x : {0.5, 1.0, 2.0, 4.0})
        for (int B = 1; B <= 8; ++B) {
            const double direct = x * std::exp(x) - s_sum(std::exp(-x), B);
            EXPECT_NEAR(sum_exp_remainder_check(x, B).gap, direct, 1e-11 * std::exp(x));
        }
}

TEST(SumExpRemainder, RandomPairs) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> xs(1e-6, 5.0);
    std::uniform_int_distribution<int> bs(1, 20);
    for (int i = 0; i < 1000; ++i) {
        const auto r = sum_exp_remainder_check(xs(rng), bs(rng));
        EXPECT_TRUE(r.lower_ok && r.upper_ok);
    }
}
