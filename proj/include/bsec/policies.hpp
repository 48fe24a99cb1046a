#pragma once

// Dynamic-Threshold policy family and simple baselines.

#include <cmath>
#include <iomanip>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bsec/core.hpp"

namespace bsec {

// alpha_{k,b}: activation time (as a fraction of N) for group k with b queries left.
class DtThresholds {
public:
    DtThresholds() = default;
    DtThresholds(int n_groups, int budget, double fill = 0.0)
        : k_(n_groups), b_(budget), table_(static_cast<std::size_t>(n_groups) * (budget + 1), fill) {
        if (n_groups < 1 || budget < 0) throw DimensionError("thresholds need K >= 1 and B >= 0");
        check_range(fill);
    }

    // rows[k-1][b] = alpha_{k,b}
    static DtThresholds from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty() || rows.front().empty()) throw DimensionError("empty threshold table");
        DtThresholds th(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()) - 1);
        for (std::size_t k = 0; k < rows.size(); ++k) {
            if (rows[k].size() != rows.front().size()) throw DimensionError("ragged threshold table");
            for (std::size_t b = 0; b < rows[k].size(); ++b)
                th.set(static_cast<int>(k) + 1, static_cast<int>(b), rows[k][b]);
        }
        return th;
    }

    int n_groups() const { return k_; }
    int budget() const { return b_; }

    double at(int k, int b) const { return table_[index(k, b)]; }
    void set(int k, int b, double alpha) {
        check_range(alpha);
        table_[index(k, b)] = alpha;
    }

    std::vector<std::vector<double>> rows() const {
        std::vector<std::vector<double>> out(static_cast<std::size_t>(k_));
        for (int k = 1; k <= k_; ++k)
            for (int b = 0; b <= b_; ++b) out[static_cast<std::size_t>(k - 1)].push_back(at(k, b));
        return out;
    }

    bool operator==(const DtThresholds&) const = default;

private:
    static void check_range(double a) {
        if (!(a >= 0.0 && a <= 1.0)) throw DomainError("threshold outside [0, 1]");
    }
    std::size_t index(int k, int b) const {
        if (k < 1 || k > k_ || b < 0 || b > b_) throw DimensionError("threshold index out of range");
        return static_cast<std::size_t>(k - 1) * (b_ + 1) + static_cast<std::size_t>(b);
    }

    int k_ = 0;
    int b_ = 0;
    std::vector<double> table_;
};

inline void to_json(nlohmann::json& j, const DtThresholds& th) {
    j = nlohmann::json{{"K", th.n_groups()}, {"B", th.budget()}, {"alpha", th.rows()}};
}

inline void from_json(const nlohmann::json& j, DtThresholds& th) {
    const int k = j.at("K").get<int>();
    const int b = j.at("B").get<int>();
    auto rows = j.at("alpha").get<std::vector<std::vector<double>>>();
    if (static_cast<int>(rows.size()) != k) throw DimensionError("alpha must have K rows");
    for (const auto& r : rows)
        if (static_cast<int>(r.size()) != b + 1) throw DimensionError("alpha rows must have B+1 entries");
    th = DtThresholds::from_rows(rows);
}

// floor(alpha * N). The small guard keeps thresholds built as t/N from landing
// one step early through rounding (e.g. 0.396 * 500 = 197.99999999999997).
inline int threshold_step(double alpha, int n) {
    return static_cast<int>(std::floor(alpha * n + 1e-9));
}

// Algorithm: skip unless t >= floor(alpha_{g,b} N) and r_t = 1; then compare when
// b > 0 and stop iff the candidate is the overall best so far, else stop.
class DtPolicy final : public PolicyImpl {
public:
    DtPolicy(int n, DtThresholds th, std::string label)
        : n_(n), th_(std::move(th)), label_(std::move(label)) {
        steps_.resize(static_cast<std::size_t>(th_.n_groups()) * (th_.budget() + 1));
        for (int k = 1; k <= th_.n_groups(); ++k)
            for (int b = 0; b <= th_.budget(); ++b)
                steps_[static_cast<std::size_t>(k - 1) * (th_.budget() + 1) + b] = threshold_step(th_.at(k, b), n_);
    }

    Action decide(const VisibleState& s, const Observation& o, std::optional<bool> overall_best) const override {
        if (overall_best) return *overall_best ? Action::Stop : Action::Skip;
        if (!o.is_group_best) return Action::Skip;
        // Budget can only shrink, but a pairwise run may start with more than the table covers.
        const int b = std::min(s.budget_left, th_.budget());
        if (o.step < step_at(o.group, b)) return Action::Skip;
        return s.budget_left > 0 ? Action::Compare : Action::Stop;
    }

    std::string name() const override { return label_; }

    void check_spec(const ProblemSpec& spec) const override {
        if (spec.n_candidates != n_) throw SpecMismatch("policy built for N=" + std::to_string(n_));
        if (spec.n_groups != th_.n_groups()) throw SpecMismatch("threshold table has wrong K");
        if (spec.budget > th_.budget() && spec.comparison_model == ComparisonModel::IsBestOverall)
            throw SpecMismatch("threshold table does not cover the budget");
    }

    const DtThresholds& thresholds() const { return th_; }
    int n() const { return n_; }
    int step_at(int k, int b) const { return steps_[static_cast<std::size_t>(k - 1) * (th_.budget() + 1) + b]; }

private:
    int n_;
    DtThresholds th_;
    std::vector<int> steps_;
    std::string label_;
};

inline Policy dt_policy(const ProblemSpec& spec, const DtThresholds& th, std::string label = "dt") {
    spec.validate();
    if (th.n_groups() != spec.n_groups || th.budget() != spec.budget)
        throw DimensionError("thresholds must be K x (B+1)");
    return Policy(std::make_shared<DtPolicy>(spec.n_candidates, th, std::move(label)));
}

namespace detail {
inline std::string fmt_alpha(double a) {
    std::ostringstream os;
    os << std::setprecision(6) << a;
    return os.str();
}
} // namespace detail

// Same threshold for every group and every remaining budget.
inline Policy single_threshold(const ProblemSpec& spec, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
    return dt_policy(spec, DtThresholds(spec.n_groups, spec.budget, alpha),
                     "single(" + detail::fmt_alpha(alpha) + ")");
}

// Group 1 activates at floor(alpha N), group 2 at floor(beta N), for every budget.
inline Policy double_threshold(const ProblemSpec& spec, double alpha, double beta) {
    if (spec.n_groups != 2) throw DimensionError("double threshold requires K = 2");
    if (!(alpha > 0.0 && alpha <= beta && beta <= 1.0)) throw DomainError("need 0 < alpha <= beta <= 1");
    DtThresholds th(2, spec.budget);
    for (int b = 0; b <= spec.budget; ++b) {
        th.set(1, b, alpha);
        th.set(2, b, beta);
    }
    return dt_policy(spec, th, "double(" + detail::fmt_alpha(alpha) + "," + detail::fmt_alpha(beta) + ")");
}

// Ignores every group but k and runs the classical rule inside it: skip the first
// ceil(lambda_k N / e) - 1 members of group k, then stop on the next in-group record.
class GroupFilterPolicy final : public PolicyImpl {
public:
    GroupFilterPolicy(int group, int cutoff) : group_(group), cutoff_(cutoff) {}

    Action decide(const VisibleState& s, const Observation& o, std::optional<bool>) const override {
        if (o.group != group_ || !o.is_group_best) return Action::Skip;
        const int seen = s.group_counts[static_cast<std::size_t>(group_ - 1)] + 1;
        return seen >= cutoff_ ? Action::Stop : Action::Skip;
    }
    std::string name() const override { return "filter(" + std::to_string(group_) + ")"; }
    int cutoff() const { return cutoff_; }

private:
    int group_;
    int cutoff_;
};

inline Policy group_filter_baseline(const ProblemSpec& spec, int k) {
    spec.validate();
    if (k < 1 || k > spec.n_groups) throw DomainError("group index out of range");
    const double expected = spec.group_probs[static_cast<std::size_t>(k - 1)] * spec.n_candidates;
    const int cutoff = std::max(1, static_cast<int>(std::ceil(expected / std::exp(1.0))));
    return Policy(std::make_shared<GroupFilterPolicy>(k, cutoff));
}

// Empirical group frequencies of a prefix of labels.
inline std::vector<double> estimate_proportions(const std::vector<int>& prefix, int n_groups) {
    if (prefix.empty()) throw EmptyPrefix("estimation prefix is empty");
    if (n_groups < 1) throw DomainError("n_groups must be >= 1");
    std::vector<double> freq(static_cast<std::size_t>(n_groups), 0.0);
    for (int g : prefix) {
        if (g < 1 || g > n_groups) throw DomainError("group label out of range");
        freq[static_cast<std::size_t>(g - 1)] += 1.0;
    }
    for (double& f : freq) f /= static_cast<double>(prefix.size());
    return freq;
}

// Uses the first floor(epsilon * N) labels of a full sequence.
inline std::vector<double> estimate_proportions(const std::vector<int>& groups, int n_groups, double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw DomainError("epsilon must lie in (0, 1]");
    const auto len = static_cast<std::size_t>(std::floor(epsilon * static_cast<double>(groups.size())));
    if (len == 0) throw EmptyPrefix("floor(epsilon N) = 0");
    return estimate_proportions(std::vector<int>(groups.begin(), groups.begin() + static_cast<long>(len)), n_groups);
}

// Marks a DT policy as runnable under the pairwise model. Costs are charged by
// run_policy: K-1 comparisons for the first overall query, then one per tracked
// maximum update. With K = 2 every query costs one comparison, as before.
inline Policy pairwise_cost_adapter(const Policy& policy, const ProblemSpec& spec) {
    spec.validate();
    if (!policy.as<DtPolicy>()) throw SpecMismatch("pairwise_cost_adapter expects a DT policy");
    return policy.with_pairwise_ready();
}

} // namespace bsec
