#pragma once

// Optimal memory-less policy for two groups by backward induction.
//
// State at step t (before observing x_t): remaining budget b, m = |G^1_{t-1}|
// (so |G^2_{t-1}| = t-1-m), and l = group of the best candidate so far. V^b_{t,m,l}
// is the success probability of the optimal memory-less policy from that state.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "bsec/core.hpp"
#include "bsec/policies.hpp"

namespace bsec {

// How the compare reward is scored.
//   Exact: posterior success of comparing, P(R_t = 0 | r_t = 1) = |G^l_{t-1}| / t.
//   AsPublished: an older closed form that overstates the compare reward; kept
//   for comparing threshold curves between the two rules.
enum class CompareReward { Exact, AsPublished };

struct ObsProbs {
    double p_group_best;              // P(r_t = 1 | state, g_t = k)
    double p_overall_given_group_best; // P(R_t = 1 | state, g_t = k, r_t = 1)
};

inline int prior_group_size(int t, int m, int k) { return k == 1 ? m : t - 1 - m; }

// Conditional observation probabilities in state (t, m, l) for an arrival of group k.
inline ObsProbs conditional_obs_probs(int t, int m, int ell, int k) {
    if (t < 1) throw DomainError("t must be >= 1");
    if (m < 0 || m > t - 1) throw DomainError("need 0 <= m <= t-1");
    if ((ell != 1 && ell != 2) || (k != 1 && k != 2)) throw DomainError("groups are 1 or 2");
    if (t == 1) return {1.0, 1.0};
    if (k == ell) return {1.0 / t, 1.0};
    const double gk = prior_group_size(t, m, k);
    return {(gk + t) / (t * (gk + 1.0)), (gk + 1.0) / (gk + t)};
}

struct ActionRewards {
    double stop;
    double skip;
    double compare; // -infinity when b = 0
    double accept() const { return std::isinf(compare) ? stop : compare; }
};

class DpTables {
public:
    int n() const { return n_; }
    int budget() const { return budget_; }
    double lambda1() const { return lambda_[0]; }
    double lambda2() const { return lambda_[1]; }
    CompareReward reward_rule() const { return rule_; }

    // V^b_{t,m,l} for 1 <= t <= N+1, 0 <= m <= t-1 (m <= N at t = N+1).
    double V(int b, int t, int m, int ell) const { return v_[index(b, t, m, ell)]; }

    ActionRewards rewards(int b, int t, int m, int k) const {
        const int ell = 3 - k;
        const int gk = prior_group_size(t, m, k);
        const int gl = prior_group_size(t, m, ell);
        const int mk = m + (k == 1 ? 1 : 0);
        const double g1_now = k == 1 ? gk + 1 : gl;
        const double g2_now = k == 2 ? gk + 1 : gl;
        ActionRewards r;
        r.stop = (gk + 1.0) / n_;
        r.skip = g1_now / t * next(b, t, mk, 1) + g2_now / t * next(b, t, mk, 2);
        if (b == 0) {
            r.compare = -std::numeric_limits<double>::infinity();
        } else if (rule_ == CompareReward::Exact) {
            r.compare = (gk + 1.0) / n_ + static_cast<double>(gl) / t * next(b - 1, t, mk, ell);
        } else {
            r.compare = (gk + 1.0) / n_ +
                        static_cast<double>(gl) / t *
                            ((gk + 1.0) / (gk + t) * t / n_ + (t - 1.0) / (gk + t) * next(b - 1, t, mk, ell));
        }
        return r;
    }

    // delta^b_{t,m,k} = 1{R(accept) >= R(skip)}; accept is compare when b > 0, stop when b = 0.
    bool accepts(int b, int t, int m, int k) const {
        const ActionRewards r = rewards(b, t, m, k);
        return r.accept() >= r.skip;
    }

    // Right-hand side of the value recursion at one state, read from the t+1 layer.
    double bellman(int b, int t, int m, int ell) const {
        const int k = 3 - ell;
        const double lam_l = lambda_[ell - 1], lam_k = lambda_[k - 1];
        const int gk = prior_group_size(t, m, k);
        const int ml = m + (ell == 1 ? 1 : 0);
        const int mk = m + (k == 1 ? 1 : 0);
        const double dl = accepts(b, t, m, ell) ? 1.0 : 0.0;
        const double dk = accepts(b, t, m, k) ? 1.0 : 0.0;
        const double same = dl / n_ + (1.0 - dl / t) * next(b, t, ml, ell);
        double other = dk / n_ + (1.0 - dk) / t * next(b, t, mk, k) +
                       (1.0 - 1.0 / t) * (1.0 - dk / (gk + 1.0)) * next(b, t, mk, ell);
        if (b > 0) other += dk / (gk + 1.0) * (1.0 - 1.0 / t) * next(b - 1, t, mk, ell);
        return lam_l * same + lam_k * other;
    }

    friend DpTables compute_tables(int n, int budget, double lambda, CompareReward rule);

private:
    static std::size_t layer(int t) { return static_cast<std::size_t>(t - 1) * t / 2; }
    std::size_t index(int b, int t, int m, int ell) const {
        return ((static_cast<std::size_t>(b) * per_budget_) + layer(t) + static_cast<std::size_t>(m)) * 2 +
               static_cast<std::size_t>(ell - 1);
    }
    double next(int b, int t, int m, int ell) const { return v_[index(b, t + 1, m, ell)]; }

    int n_ = 0;
    int budget_ = 0;
    double lambda_[2] = {0.5, 0.5};
    CompareReward rule_ = CompareReward::Exact;
    std::size_t per_budget_ = 0;
    std::vector<double> v_;
};

// Backward induction over t = N..1 for every budget level, O(B N^2).
inline DpTables compute_tables(int n, int budget, double lambda, CompareReward rule = CompareReward::Exact) {
    if (n < 1) throw DomainError("N must be >= 1");
    if (budget < 0) throw DomainError("B must be >= 0");
    if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("lambda must lie in (0, 1)");
    DpTables d;
    d.n_ = n;
    d.budget_ = budget;
    d.lambda_[0] = lambda;
    d.lambda_[1] = 1.0 - lambda;
    d.rule_ = rule;
    d.per_budget_ = DpTables::layer(n + 2);
    d.v_.assign(d.per_budget_ * static_cast<std::size_t>(budget + 1) * 2, 0.0);
    for (int t = n; t >= 1; --t)
        for (int b = 0; b <= budget; ++b)
            for (int m = 0; m < t; ++m)
                for (int ell = 1; ell <= 2; ++ell) d.v_[d.index(b, t, m, ell)] = d.bellman(b, t, m, ell);
    return d;
}

inline ActionRewards action_rewards(const DpTables& d, int b, int t, int m, int k) {
    if (b < 0 || b > d.budget() || t < 1 || t > d.n() || m < 0 || m > t - 1 || (k != 1 && k != 2))
        throw DomainError("state outside the table");
    return d.rewards(b, t, m, k);
}

// Success probability from the empty state. x_1 is always both an in-group and an
// overall record, so the step-1 choice is read off the rewards at (t=1, m=0).
inline double initial_success(const DpTables& d) {
    double total = 0.0;
    for (int k = 1; k <= 2; ++k) {
        const ActionRewards r = d.rewards(d.budget(), 1, 0, k);
        total += (k == 1 ? d.lambda1() : d.lambda2()) * std::max(r.stop, r.skip);
    }
    return total;
}

// Online rule: on an in-group record, accept iff R(accept) >= R(skip); with b > 0
// accepting means compare, then stop iff the candidate is the overall best.
class DpPolicy final : public PolicyImpl {
public:
    explicit DpPolicy(std::shared_ptr<const DpTables> tables) : d_(std::move(tables)) {}

    Action decide(const VisibleState& s, const Observation& o, std::optional<bool> overall_best) const override {
        if (overall_best) return *overall_best ? Action::Stop : Action::Skip;
        if (!o.is_group_best) return Action::Skip;
        if (s.group_counts.size() != 2 || o.step > d_->n() || s.budget_left > d_->budget())
            throw SpecMismatch("state outside the DP tables");
        const int b = s.budget_left;
        const ActionRewards r = d_->rewards(b, o.step, s.group_counts[0], o.group);
        // At t = 1 the candidate is known to be the overall best, so no query is spent.
        if (b == 0 || o.step == 1) return r.stop >= r.skip ? Action::Stop : Action::Skip;
        return r.compare >= r.skip ? Action::Compare : Action::Skip;
    }

    std::string name() const override { return "optimal"; }

    void check_spec(const ProblemSpec& spec) const override {
        if (spec.n_candidates != d_->n() || spec.n_groups != 2 || spec.budget != d_->budget() ||
            std::abs(spec.group_probs[0] - d_->lambda1()) > 1e-12 ||
            spec.comparison_model != ComparisonModel::IsBestOverall)
            throw SpecMismatch("DP tables were computed for a different instance");
    }

    const DpTables& tables() const { return *d_; }

private:
    std::shared_ptr<const DpTables> d_;
};

inline Policy optimal_policy(const DpTables& d) {
    return Policy(std::make_shared<DpPolicy>(std::make_shared<const DpTables>(d)));
}

inline Policy optimal_policy(const DpTables& d, const ProblemSpec& spec) {
    Policy p = optimal_policy(d);
    p.check_spec(spec);
    return p;
}

// region[t-1][m] = accept at (t, m) for an in-group record of group g with b left.
using AcceptanceRegion = std::vector<std::vector<bool>>;

inline AcceptanceRegion acceptance_region(const DpTables& d, int b, int g) {
    if (b < 0 || b > d.budget()) throw DomainError("budget outside the table");
    if (g != 1 && g != 2) throw DomainError("group must be 1 or 2");
    AcceptanceRegion region(static_cast<std::size_t>(d.n()));
    for (int t = 1; t <= d.n(); ++t) {
        auto& row = region[static_cast<std::size_t>(t - 1)];
        row.resize(static_cast<std::size_t>(t));
        for (int m = 0; m < t; ++m) row[static_cast<std::size_t>(m)] = d.accepts(b, t, m, g);
    }
    return region;
}

struct DtThresholdEstimate {
    std::vector<double> alpha; // alpha*_b for group 1, b = 0..B
    std::vector<double> beta;  // beta*_b for group 2
};

// Along the line m = min(floor(lambda t), t-1), the smallest t/N from which the
// acceptance region holds at every later step.
inline DtThresholdEstimate estimate_dt_thresholds(const DpTables& d, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("lambda must lie in (0, 1)");
    DtThresholdEstimate out;
    for (int g = 1; g <= 2; ++g) {
        auto& dst = g == 1 ? out.alpha : out.beta;
        for (int b = 0; b <= d.budget(); ++b) {
            int first = 0;
            for (int t = d.n(); t >= 1; --t) {
                const int m = std::min(static_cast<int>(std::floor(lambda * t)), t - 1);
                if (!d.accepts(b, t, m, g)) break;
                first = t;
            }
            if (first == 0)
                throw DegenerateRegion("line never enters the acceptance region (g=" + std::to_string(g) +
                                       ", b=" + std::to_string(b) + ")");
            dst.push_back(static_cast<double>(first) / d.n());
        }
    }
    return out;
}

inline DtThresholdEstimate estimate_dt_thresholds(const DpTables& d) { return estimate_dt_thresholds(d, d.lambda1()); }

// DT table with alpha_{1,b} = alpha*_b and alpha_{2,b} = beta*_b.
inline DtThresholds to_dt_thresholds(const DtThresholdEstimate& e) {
    return DtThresholds::from_rows({e.alpha, e.beta});
}

// CSV: t,m,g,b,accept
inline void write_region_csv(std::ostream& os, const DpTables& d, int b, int g, bool header = true) {
    if (header) os << "t,m,g,b,accept\n";
    const AcceptanceRegion r = acceptance_region(d, b, g);
    for (int t = 1; t <= d.n(); ++t)
        for (int m = 0; m < t; ++m)
            os << t << ',' << m << ',' << g << ',' << b << ',' << (r[t - 1][m] ? 1 : 0) << '\n';
}

// CSV: b,t,m,l,V
inline void write_values_csv(std::ostream& os, const DpTables& d) {
    os << "b,t,m,l,V\n";
    const auto prec = os.precision(17);
    for (int b = 0; b <= d.budget(); ++b)
        for (int t = 1; t <= d.n() + 1; ++t)
            for (int m = 0; m < t; ++m)
                for (int ell = 1; ell <= 2; ++ell) os << b << ',' << t << ',' << m << ',' << ell << ',' << d.V(b, t, m, ell) << '\n';
    os.precision(prec);
}

} // namespace bsec
