#pragma once

// Monte Carlo estimation of policy success rates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "bsec/core.hpp"
#include "bsec/policies.hpp"

namespace bsec {

struct SuccessEstimate {
    std::uint64_t trials = 0;
    std::uint64_t successes = 0;
    double rate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::uint64_t seed = 0;

    double std_error() const { return trials ? std::sqrt(rate * (1.0 - rate) / trials) : 0.0; }
};

// 95% Wilson score interval.
inline std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials) {
    if (trials == 0) return {0.0, 1.0};
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, std::min(p, centre - half)), std::min(1.0, std::max(p, centre + half))};
}

inline SuccessEstimate make_estimate(std::uint64_t successes, std::uint64_t trials, std::uint64_t seed) {
    SuccessEstimate e;
    e.trials = trials;
    e.successes = successes;
    e.rate = trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0;
    std::tie(e.ci_low, e.ci_high) = wilson_interval(successes, trials);
    e.seed = seed;
    return e;
}

// Stream: values generated lazily, success at the stop decided by one extra draw.
// Materialized: full ArrivalSequence per trial (sample_arrival).
enum class ArrivalMode { Stream, Materialized };

struct McOptions {
    ArrivalMode mode = ArrivalMode::Stream;
    unsigned threads = 0; // 0: hardware concurrency
};

inline bool run_trial(const ProblemSpec& spec, const Policy& policy, std::uint64_t trial_seed, ArrivalMode mode) {
    if (mode == ArrivalMode::Materialized) return run_policy(sample_arrival(spec, trial_seed), policy, spec).success;
    StreamSource src(spec, trial_seed);
    return run_policy(src, policy, spec).success;
}

// Trial i uses derive_seed(seed, i), so results do not depend on the thread count.
inline SuccessEstimate estimate_success(const ProblemSpec& spec, const Policy& policy, std::uint64_t trials,
                                        std::uint64_t seed, McOptions opt = {}) {
    spec.validate();
    if (trials < 1) throw DomainError("trials must be >= 1");
    policy.check_spec(spec);
    unsigned workers = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, trials));

    std::vector<std::uint64_t> wins(workers, 0);
    auto work = [&](unsigned w) {
        const std::uint64_t lo = trials * w / workers, hi = trials * (w + 1) / workers;
        std::uint64_t local = 0;
        for (std::uint64_t i = lo; i < hi; ++i)
            if (run_trial(spec, policy, derive_seed(seed, i), opt.mode)) ++local;
        wins[w] = local;
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::mutex failure_mu;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    work(w);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mu);
                    if (!failure) failure = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }
    std::uint64_t total = 0;
    for (auto c : wins) total += c;
    return make_estimate(total, trials, seed);
}

struct SweepCell {
    ProblemSpec spec;
    Policy policy;
    std::string policy_id;
    double alpha = std::nan("");
    double beta = std::nan("");
};

struct SweepRow {
    SweepCell cell;
    SuccessEstimate estimate;
};

// Every cell reuses the same base seed, so cells share random numbers and their
// differences are less noisy.
inline std::vector<SweepRow> sweep(const std::vector<SweepCell>& grid, std::uint64_t trials, std::uint64_t seed,
                                   McOptions opt = {}) {
    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    for (const auto& c : grid) rows.push_back({c, estimate_success(c.spec, c.policy, trials, seed, opt)});
    return rows;
}

namespace detail {
inline std::string join_probs(const std::vector<double>& p) {
    std::ostringstream os;
    os.precision(10);
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ";" : "") << p[i];
    return os.str();
}
inline std::string csv_num(double v) {
    if (std::isnan(v)) return "";
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}
} // namespace detail

// CSV: K,B,lambda,N,policy_id,alpha,beta,trials,rate,ci_low,ci_high,seed
// lambda lists the K group probabilities joined by ';'.
inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, bool header = true) {
    if (header) os << "K,B,lambda,N,policy_id,alpha,beta,trials,rate,ci_low,ci_high,seed\n";
    for (const auto& r : rows) {
        const auto& s = r.cell.spec;
        const auto& e = r.estimate;
        os << s.n_groups << ',' << s.budget << ',' << detail::join_probs(s.group_probs) << ',' << s.n_candidates
           << ',' << r.cell.policy_id << ',' << detail::csv_num(r.cell.alpha) << ',' << detail::csv_num(r.cell.beta)
           << ',' << e.trials << ',' << detail::csv_num(e.rate) << ',' << detail::csv_num(e.ci_low) << ','
           << detail::csv_num(e.ci_high) << ',' << e.seed << '\n';
    }
}

} // namespace bsec
