#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "bsec/bsec.hpp"

using namespace bsec;

namespace {

constexpr double kInvE = 1.0 / std::numbers::e;

// Exact success of "take `forced` at step t0, then follow the DP policy", conditioned
// on g_t0 = k, |G^1_{t0-1}| = m and r_t0 = 1, with b queries available at t0.
double conditional_success(const DpTables& d, int t0, int m, int k, int b, Action forced) {
    const int n = d.n();
    const ProblemSpec spec = ProblemSpec::two_groups(n, d.lambda1(), b);
    const DpPolicy dp(std::make_shared<const DpTables>(d));
    const Policy p = Policy::from_function("forced", [&](const VisibleState& s, const Observation& o, std::optional<bool> r) {
        if (o.step < t0) return Action::Skip;
        if (o.step == t0) {
            if (r) return *r ? Action::Stop : Action::Skip;
            return forced;
        }
        return dp.decide(s, o, r);
    });
    ArrivalSequence a;
    a.global_ranks.resize(n);
    a.groups.assign(n, 1);
    double num = 0.0, den = 0.0;
    for (int code = 0; code < (1 << n); ++code) {
        double w = 1.0;
        for (int i = 0; i < n; ++i) {
            a.groups[i] = (code >> i & 1) ? 2 : 1;
            w *= a.groups[i] == 1 ? d.lambda1() : d.lambda2();
        }
        if (a.groups[t0 - 1] != k) continue;
        if (std::count(a.groups.begin(), a.groups.begin() + (t0 - 1), 1) != m) continue;
        std::iota(a.global_ranks.begin(), a.global_ranks.end(), 1);
        do {
            if (!observe(a, VisibleState{t0, 0, {}}).is_group_best) continue;
            den += w;
            if (run_policy(a, p, spec).success) num += w;
        } while (std::next_permutation(a.global_ranks.begin(), a.global_ranks.end()));
    }
    return den > 0 ? num / den : std::nan("");
}

} // namespace

TEST(ConditionalObsProbs, Examples) {
    EXPECT_EQ(conditional_obs_probs(1, 0, 1, 2).p_group_best, 1.0);
    const auto empty_group = conditional_obs_probs(4, 3, 1, 2); // |G^2_3| = 0
    EXPECT_DOUBLE_EQ(empty_group.p_group_best, 1.0);
    EXPECT_DOUBLE_EQ(empty_group.p_overall_given_group_best, 1.0 / 4);
    const auto ex = conditional_obs_probs(5, 2, 1, 2);
    EXPECT_NEAR(ex.p_group_best, 7.0 / 15, 1e-15);
    EXPECT_NEAR(ex.p_overall_given_group_best, 3.0 / 7, 1e-15);
    const auto same = conditional_obs_probs(3, 2, 1, 1);
    EXPECT_NEAR(same.p_group_best, 1.0 / 3, 1e-15);
    EXPECT_EQ(same.p_overall_given_group_best, 1.0);
    EXPECT_THROW(conditional_obs_probs(3, 3, 1, 1), DomainError);
}

TEST(ActionRewards, TerminalRow) {
    const auto d = compute_tables(7, 2, 0.4);
    for (int b = 0; b <= 2; ++b)
        for (int m = 0; m < 7; ++m)
            for (int k = 1; k <= 2; ++k) {
                const auto r = action_rewards(d, b, 7, m, k);
                EXPECT_EQ(r.skip, 0.0);
                EXPECT_DOUBLE_EQ(r.stop, (prior_group_size(7, m, k) + 1.0) / 7);
                if (b == 0) {
                    EXPECT_TRUE(std::isinf(r.compare) && r.compare < 0);
                }
            }
    EXPECT_DOUBLE_EQ(action_rewards(d, 0, 7, 6, 1).stop, 1.0);
    EXPECT_THROW(action_rewards(d, 3, 1, 0, 1), DomainError);
}

TEST(ActionRewards, MatchExhaustiveConditionalSuccess) {
    const auto d = compute_tables(6, 1, 0.5);
    double worst = 0.0;
    int checked = 0;
    for (int t = 1; t <= 6; ++t)
        for (int m = 0; m < t; ++m)
            for (int k = 1; k <= 2; ++k)
                for (int b = 0; b <= 1; ++b) {
                    const auto r = action_rewards(d, b, t, m, k);
                    const double stop = conditional_success(d, t, m, k, b, Action::Stop);
                    if (std::isnan(stop)) continue;
                    worst = std::max(worst, std::abs(stop - r.stop));
                    worst = std::max(worst, std::abs(conditional_success(d, t, m, k, b, Action::Skip) - r.skip));
                    if (b > 0)
                        worst = std::max(worst, std::abs(conditional_success(d, t, m, k, b, Action::Compare) - r.compare));
                    ++checked;
                }
    EXPECT_LT(worst, 1e-12);
    EXPECT_GT(checked, 60);
}

TEST(ActionRewards, PublishedCompareRuleOverstates) {
    const auto exact = compute_tables(6, 1, 0.5);
    const auto pub = compute_tables(6, 1, 0.5, CompareReward::AsPublished);
    double worst = 0.0;
    for (int t = 2; t <= 6; ++t)
        for (int m = 0; m < t; ++m)
            for (int k = 1; k <= 2; ++k)
                worst = std::max(worst, pub.rewards(1, t, m, k).compare - exact.rewards(1, t, m, k).compare);
    EXPECT_GT(worst, 0.05);
}

TEST(DpTables, TerminalAndRange) {
    const auto d = compute_tables(40, 3, 0.35);
    for (int b = 0; b <= 3; ++b)
        for (int m = 0; m <= 40; ++m)
            for (int l = 1; l <= 2; ++l) EXPECT_EQ(d.V(b, 41, m, l), 0.0);
    for (int b = 0; b <= 3; ++b)
        for (int t = 1; t <= 40; ++t)
            for (int m = 0; m < t; ++m)
                for (int l = 1; l <= 2; ++l) {
                    const double v = d.V(b, t, m, l);
                    EXPECT_GE(v, 0.0);
                    EXPECT_LE(v, 1.0);
                    if (b > 0) {
                        EXPECT_GE(v, d.V(b - 1, t, m, l) - 1e-12);
                    }
                }
}

TEST(DpTables, BellmanConsistency) {
    const auto d = compute_tables(30, 2, 0.6);
    for (int b = 0; b <= 2; ++b)
        for (int t = 1; t <= 30; ++t)
            for (int m = 0; m < t; ++m)
                for (int l = 1; l <= 2; ++l) EXPECT_NEAR(d.bellman(b, t, m, l), d.V(b, t, m, l), 1e-14);
}

TEST(DpTables, RejectsBadInput) {
    EXPECT_THROW(compute_tables(0, 0, 0.5), DomainError);
    EXPECT_THROW(compute_tables(5, -1, 0.5), DomainError);
    EXPECT_THROW(compute_tables(5, 0, 1.0), DomainError);
}

TEST(InitialSuccess, SingleCandidate) {
    for (int B : {0, 2}) EXPECT_EQ(initial_success(compute_tables(1, B, 0.5)), 1.0);
}

TEST(InitialSuccess, FrozenOracleValues) {
    // Exhaustive Python enumeration of the same policy.
    EXPECT_NEAR(initial_success(compute_tables(2, 0, 0.5)), 0.5, 1e-15);
    EXPECT_NEAR(initial_success(compute_tables(6, 0, 0.5)), 0.33923611111111107, 1e-12);
    EXPECT_NEAR(initial_success(compute_tables(6, 1, 0.5)), 0.41076388888888893, 1e-12);
    EXPECT_NEAR(initial_success(compute_tables(6, 2, 0.8)), 0.4272622222222222, 1e-12);
    EXPECT_NEAR(initial_success(compute_tables(5, 1, 0.3)), 0.42689333333333324, 1e-12);
}

TEST(InitialSuccess, DominatesDoubleThresholdGrid) {
    for (int B : {0, 2}) {
        const auto spec = ProblemSpec::two_groups(6, 0.5, B);
        const double v = initial_success(compute_tables(6, B, 0.5));
        double best_dt = 0.0;
        for (int i = 1; i <= 20; ++i)
            for (int j = i; j <= 20; ++j)
                best_dt = std::max(best_dt, exact_policy_success(spec, double_threshold(spec, i / 20.0, j / 20.0)).success_prob);
        EXPECT_GE(v, best_dt - 1e-12) << B;
        // Full information at N = 6 caps every policy at the classical optimum 77/180.
        EXPECT_LE(v, 77.0 / 180 + 1e-12);
    }
}

TEST(InitialSuccess, LargeInstanceShape) {
    double prev = 0.0;
    for (int B = 0; B <= 2; ++B) {
        const double v = initial_success(compute_tables(500, B, 0.6));
        EXPECT_GE(v, prev);
        prev = v;
    }
    EXPECT_NEAR(initial_success(compute_tables(500, 0, 0.99)), kInvE, 0.01);
}

TEST(OptimalPolicy, SpecMismatch) {
    const auto d = compute_tables(6, 1, 0.5);
    EXPECT_THROW(optimal_policy(d, ProblemSpec::two_groups(7, 0.5, 1)), SpecMismatch);
    EXPECT_THROW(optimal_policy(d, ProblemSpec::two_groups(6, 0.4, 1)), SpecMismatch);
    EXPECT_THROW(optimal_policy(d, ProblemSpec::two_groups(6, 0.5, 2)), SpecMismatch);
    const Policy p = optimal_policy(d);
    const auto other = ProblemSpec::two_groups(8, 0.5, 1);
    EXPECT_THROW(run_policy(sample_arrival(other, 1), p, other), SpecMismatch);
}

TEST(OptimalPolicy, ExactValueMatchesTables) {
    for (int B : {0, 1, 2})
        for (double lam : {0.3, 0.8}) {
            const auto d = compute_tables(6, B, lam);
            const auto spec = ProblemSpec::two_groups(6, lam, B);
            EXPECT_NEAR(exact_policy_success(spec, optimal_policy(d, spec)).success_prob, initial_success(d), 1e-12);
        }
}

TEST(OptimalPolicy, FollowsRewardArgmax) {
    const auto d = compute_tables(6, 2, 0.5);
    const auto spec = ProblemSpec::two_groups(6, 0.5, 2);
    const Policy p = optimal_policy(d, spec);
    const auto checker = Policy::from_function("check", [&](const VisibleState& s, const Observation& o, std::optional<bool> r) {
        const Action a = p.decide(s, o, r);
        if (!r && o.is_group_best) {
            const auto rw = d.rewards(s.budget_left, o.step, s.group_counts[0], o.group);
            const bool accept = rw.accept() >= rw.skip;
            EXPECT_EQ(a != Action::Skip, accept);
        }
        return a;
    });
    for (std::uint64_t seed = 0; seed < 3000; ++seed) run_policy(sample_arrival(spec, seed), checker, spec);
}

TEST(OptimalPolicy, MonteCarloMatchesTables) {
    const auto d = compute_tables(500, 1, 0.7);
    const auto spec = ProblemSpec::two_groups(500, 0.7, 1);
    const auto e = estimate_success(spec, optimal_policy(d, spec), 100000, 99);
    EXPECT_NEAR(e.rate, initial_success(d), 4 * e.std_error());
}

TEST(AcceptanceRegion, LastRowAccepts) {
    const auto d = compute_tables(50, 2, 0.7);
    for (int b = 0; b <= 2; ++b)
        for (int g = 1; g <= 2; ++g) {
            const auto r = acceptance_region(d, b, g);
            ASSERT_EQ(r.size(), 50u);
            for (bool x : r.back()) EXPECT_TRUE(x);
        }
    EXPECT_THROW(acceptance_region(d, 3, 1), DomainError);
    EXPECT_THROW(acceptance_region(d, 0, 3), DomainError);
}

TEST(AcceptanceRegion, CsvMatchesRegion) {
    const auto d = compute_tables(20, 1, 0.6);
    std::ostringstream os;
    write_region_csv(os, d, 1, 2);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "t,m,g,b,accept");
    const auto r = acceptance_region(d, 1, 2);
    int rows = 0;
    while (std::getline(is, line)) {
        int t, m, g, b, acc;
        char c;
        std::istringstream ls(line);
        ls >> t >> c >> m >> c >> g >> c >> b >> c >> acc;
        EXPECT_EQ(g, 2);
        EXPECT_EQ(b, 1);
        EXPECT_EQ(acc == 1, r[t - 1][m]);
        ++rows;
    }
    EXPECT_EQ(rows, 20 * 21 / 2);
}

TEST(ValuesCsv, DumpsEveryState) {
    const auto d = compute_tables(5, 1, 0.5);
    std::ostringstream os;
    write_values_csv(os, d);
    const auto text = os.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 2 * 2 * (6 * 7 / 2));
}

TEST(EstimateDtThresholds, NoBudgetRecoversCorollaryPair) {
    const double lam = 0.7;
    const auto e = estimate_dt_thresholds(compute_tables(500, 0, lam), lam);
    EXPECT_NEAR(e.alpha[0], lam * std::exp(1 / lam - 2), 0.03);
    EXPECT_NEAR(e.beta[0], lam, 0.03);
}

TEST(EstimateDtThresholds, NearlyOneGroup) {
    const auto e = estimate_dt_thresholds(compute_tables(500, 2, 0.98));
    for (double a : e.alpha) EXPECT_NEAR(a, kInvE, 0.05);
}

TEST(EstimateDtThresholds, PublishedRuleCurves) {
    // The AsPublished compare reward puts both thresholds near 1/e for b >= 1.
    const auto e = estimate_dt_thresholds(compute_tables(500, 2, 0.7, CompareReward::AsPublished));
    for (int b = 1; b <= 2; ++b) {
        EXPECT_NEAR(e.alpha[b], kInvE, 0.05);
        EXPECT_NEAR(e.beta[b], kInvE, 0.05);
    }
}

TEST(EstimateDtThresholds, ToDtTable) {
    const auto e = estimate_dt_thresholds(compute_tables(100, 1, 0.6));
    const auto th = to_dt_thresholds(e);
    EXPECT_EQ(th.n_groups(), 2);
    EXPECT_EQ(th.budget(), 1);
    EXPECT_EQ(th.at(2, 1), e.beta[1]);
}
