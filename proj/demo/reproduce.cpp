// Prints the main quantities of the budgeted two-group secretary model:
// asymptotic single-threshold curves, the two-group corollary thresholds,
// and the DP-recovered thresholds compared with their DT policy by simulation.

#include <cstdio>
#include <numbers>

#include "bsec/bsec.hpp"

using namespace bsec;

int main() {
    const double inv_e = 1.0 / std::numbers::e;

    std::printf("single threshold at alpha = 1/e: limit (optimal alpha, value)\n");
    for (int K : {2, 3, 5})
        for (int B = 0; B <= 3; ++B) {
            const AlphaOptimum o = optimal_single_alpha(K, B);
            std::printf("  K=%d B=%d  %.4f  (%.4f, %.4f)  bound %.4f\n", K, B, single_threshold_limit(K, inv_e, B),
                        o.alpha, o.value, single_threshold_bound(K, B));
        }

    std::printf("\ntwo groups, corollary thresholds\n");
    for (double lam : {0.5, 0.7, 0.9})
        for (int B = 0; B <= 2; ++B) {
            const CorollaryResult r = corollary_thresholds(lam, B);
            std::printf("  lambda=%.1f B=%d  alpha %.4f beta %.4f  limit %.4f  bound %.4f\n", lam, B,
                        r.thresholds.alpha, r.thresholds.beta,
                        double_threshold_limit(r.thresholds.alpha, r.thresholds.beta, lam, B), r.lower_bound);
        }

    std::printf("\nDP at N=500, lambda=0.7: recovered thresholds and simulated success (1e5 trials)\n");
    const int n = 500, budget = 2;
    const double lam = 0.7;
    const DpTables d = compute_tables(n, budget, lam);
    const DtThresholdEstimate e = estimate_dt_thresholds(d, lam);
    for (int b = 0; b <= budget; ++b) std::printf("  b=%d  alpha* %.3f beta* %.3f\n", b, e.alpha[b], e.beta[b]);
    const ProblemSpec spec = ProblemSpec::two_groups(n, lam, budget);
    const SuccessEstimate opt = estimate_success(spec, optimal_policy(d, spec), 100000, 1);
    const SuccessEstimate dt = estimate_success(spec, dt_policy(spec, to_dt_thresholds(e)), 100000, 1);
    std::printf("  dp value %.4f  optimal policy %.4f [%.4f, %.4f]  dt policy %.4f [%.4f, %.4f]\n", initial_success(d),
                opt.rate, opt.ci_low, opt.ci_high, dt.rate, dt.ci_low, dt.ci_high);
}
