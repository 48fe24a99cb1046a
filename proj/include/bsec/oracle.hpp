#pragma once

// Exact success probabilities by exhaustive enumeration of small instances.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "bsec/core.hpp"
#include "bsec/dp.hpp"

namespace bsec {

struct ExactResult {
    double success_prob = 0.0;
    std::uint64_t n_outcomes = 0; // N! * K^N
    double total_weight = 0.0;    // sum of all outcome weights, 1 up to rounding
};

struct OracleLimits {
    int max_n = 9;
    std::uint64_t max_outcomes = 400'000'000;
};

// Runs `policy` through run_policy on every (permutation, labeling) pair.
// For each labeling the successes are counted as an integer over the N!
// permutations, then weighted by prod lambda_{g_t} / N!.
inline ExactResult exact_policy_success(const ProblemSpec& spec, const Policy& policy, OracleLimits lim = {}) {
    spec.validate();
    const int n = spec.n_candidates;
    const int k = spec.n_groups;
    if (n > lim.max_n) throw InstanceTooLarge("oracle supports N <= " + std::to_string(lim.max_n));
    std::uint64_t perms = 1;
    for (int i = 2; i <= n; ++i) perms *= static_cast<std::uint64_t>(i);
    std::uint64_t outcomes = perms;
    for (int i = 0; i < n; ++i) {
        if (outcomes > lim.max_outcomes / static_cast<std::uint64_t>(k))
            throw InstanceTooLarge("N! K^N exceeds the enumeration cap");
        outcomes *= static_cast<std::uint64_t>(k);
    }

    ArrivalSequence seq;
    seq.global_ranks.resize(static_cast<std::size_t>(n));
    seq.groups.assign(static_cast<std::size_t>(n), 1);
    ExactResult res;
    res.n_outcomes = outcomes;
    const double inv_perms = 1.0 / static_cast<double>(perms);

    for (;;) {
        double weight = inv_perms;
        for (int g : seq.groups) weight *= spec.group_probs[static_cast<std::size_t>(g - 1)];

        std::iota(seq.global_ranks.begin(), seq.global_ranks.end(), 1);
        std::uint64_t wins = 0;
        do {
            if (run_policy(seq, policy, spec).success) ++wins;
        } while (std::next_permutation(seq.global_ranks.begin(), seq.global_ranks.end()));
        res.success_prob += weight * static_cast<double>(wins);
        res.total_weight += weight * static_cast<double>(perms);

        // Odometer over labelings.
        int pos = n - 1;
        while (pos >= 0 && seq.groups[static_cast<std::size_t>(pos)] == k) seq.groups[static_cast<std::size_t>(pos--)] = 1;
        if (pos < 0) break;
        ++seq.groups[static_cast<std::size_t>(pos)];
    }
    return res;
}

// P(r_t = 1 | state, g_t = k) and P(R_t = 1 | state, g_t = k, r_t = 1) for two
// groups, counted over every relative order of the first t candidates and every
// placement of the m group-1 labels among the first t-1 steps. The state fixes
// the group l of the best of the first t-1 candidates.
inline ObsProbs exact_conditional_probs(int t, int m, int ell, int k, int max_t = 8) {
    if (t < 1 || m < 0 || m > t - 1) throw DomainError("need t >= 1 and 0 <= m <= t-1");
    if ((ell != 1 && ell != 2) || (k != 1 && k != 2)) throw DomainError("groups are 1 or 2");
    if (t > max_t) throw InstanceTooLarge("conditional enumeration supports t <= " + std::to_string(max_t));
    if (t == 1) return {1.0, 1.0};
    if (prior_group_size(t, m, ell) == 0) throw DomainError("conditioning state has probability zero");

    // Every labeling with m ones among t-1 slots is equally likely given m.
    std::vector<int> labels(static_cast<std::size_t>(t - 1), 2);
    std::fill(labels.begin(), labels.begin() + m, 1);
    std::sort(labels.begin(), labels.end());
    labels.push_back(k);

    std::uint64_t in_state = 0, group_best = 0, overall_best = 0;
    std::vector<int> ranks(static_cast<std::size_t>(t));
    do {
        std::iota(ranks.begin(), ranks.end(), 1);
        do {
            int best_prev = 0;
            for (int s = 1; s < t; ++s)
                if (best_prev == 0 || ranks[s - 1] < ranks[best_prev - 1]) best_prev = s;
            if (labels[best_prev - 1] != ell) continue;
            ++in_state;
            const int x = ranks[t - 1];
            bool r = true, R = true;
            for (int s = 1; s < t; ++s) {
                if (ranks[s - 1] < x) {
                    R = false;
                    if (labels[s - 1] == k) r = false;
                }
            }
            if (r) {
                ++group_best;
                if (R) ++overall_best;
            }
        } while (std::next_permutation(ranks.begin(), ranks.end()));
    } while (std::next_permutation(labels.begin(), labels.end() - 1));

    return {static_cast<double>(group_best) / static_cast<double>(in_state),
            group_best ? static_cast<double>(overall_best) / static_cast<double>(group_best) : 0.0};
}

} // namespace bsec
