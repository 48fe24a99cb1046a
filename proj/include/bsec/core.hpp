#pragma once

// Discrete-event model of the budgeted multi-group secretary process.
//
// Candidates are represented purely by global rank (1 = best). At every step
// the decision-maker sees the arriving candidate's group and whether it beats
// every earlier member of that group (free signal). Whether it beats every
// earlier candidate overall is only revealed by a paid query.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bsec/errors.hpp"
#include "bsec/rng.hpp"

namespace bsec {

enum class ComparisonModel {
    IsBestOverall, // one unit of budget reveals 1{R_t = 1}
    Pairwise,      // one unit of budget compares two candidates
};

inline const char* to_string(ComparisonModel m) {
    return m == ComparisonModel::IsBestOverall ? "is-best-overall" : "pairwise";
}

struct ProblemSpec {
    int n_candidates = 1;
    int n_groups = 1;
    std::vector<double> group_probs{1.0};
    int budget = 0;
    ComparisonModel comparison_model = ComparisonModel::IsBestOverall;

    void validate() const {
        if (n_candidates < 1) throw DomainError("n_candidates must be >= 1");
        if (n_groups < 1) throw DomainError("n_groups must be >= 1");
        if (budget < 0) throw DomainError("budget must be >= 0");
        if (static_cast<int>(group_probs.size()) != n_groups)
            throw DimensionError("group_probs must have n_groups entries");
        double total = 0.0;
        for (double p : group_probs) {
            if (!(p > 0.0)) throw DomainError("group probabilities must be strictly positive");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12) throw DomainError("group probabilities must sum to 1");
    }

    // Two groups with P(group 1) = lambda.
    static ProblemSpec two_groups(int n, double lambda, int budget,
                                  ComparisonModel model = ComparisonModel::IsBestOverall) {
        ProblemSpec s{n, 2, {lambda, 1.0 - lambda}, budget, model};
        s.validate();
        return s;
    }

    static ProblemSpec uniform_groups(int n, int k, int budget,
                                      ComparisonModel model = ComparisonModel::IsBestOverall) {
        ProblemSpec s{n, k, std::vector<double>(static_cast<std::size_t>(k), 1.0 / k), budget, model};
        // 1/k summed k times can drift by an ulp or two; pin the last entry.
        double head = 0.0;
        for (int i = 0; i + 1 < k; ++i) head += s.group_probs[static_cast<std::size_t>(i)];
        s.group_probs.back() = 1.0 - head;
        s.validate();
        return s;
    }
};

// One realized arrival order. Steps and group labels are 1-based.
struct ArrivalSequence {
    std::vector<int> global_ranks; // permutation of 1..N, rank 1 = best
    std::vector<int> groups;       // labels in 1..K

    int size() const { return static_cast<int>(global_ranks.size()); }
    int rank_at(int t) const { return global_ranks[static_cast<std::size_t>(t - 1)]; }
    int group_at(int t) const { return groups[static_cast<std::size_t>(t - 1)]; }

    bool is_valid(int n_groups) const {
        const int n = size();
        if (static_cast<int>(groups.size()) != n) return false;
        std::vector<char> seen(static_cast<std::size_t>(n) + 1, 0);
        for (int r : global_ranks) {
            if (r < 1 || r > n || seen[static_cast<std::size_t>(r)]) return false;
            seen[static_cast<std::size_t>(r)] = 1;
        }
        return std::all_of(groups.begin(), groups.end(), [&](int g) { return g >= 1 && g <= n_groups; });
    }
};

// Free signals at step t: g_t and 1{r_t = 1}.
struct Observation {
    int step = 1;
    int group = 1;
    bool is_group_best = true;
};

// What a policy may condition on: t, B_t and |G^k_{t-1}|.
struct VisibleState {
    int step = 1;
    int budget_left = 0;
    std::vector<int> group_counts; // index k-1 holds |G^k_{t-1}|

    int seen() const { return std::accumulate(group_counts.begin(), group_counts.end(), 0); }
};

// Simulator state. best_group (g*_{t-1}, 0 before t=2) is kept for diagnostics and
// never handed to policies; they receive the VisibleState base.
struct SimState : VisibleState {
    int best_group = 0;
};

struct TrialOutcome {
    bool success = false;
    std::optional<int> stop_time;          // tau
    std::optional<int> first_compare_time; // rho_1
    int comparisons_used = 0;
};

enum class Action { Skip, Stop, Compare };

inline const char* to_string(Action a) {
    switch (a) {
    case Action::Skip: return "skip";
    case Action::Stop: return "stop";
    case Action::Compare: return "compare";
    }
    return "?";
}

// Decision rule. `overall_best` is empty on the first call of a step and holds
// 1{R_t = 1} on the follow-up call after a compare.
class PolicyImpl {
public:
    virtual ~PolicyImpl() = default;
    virtual Action decide(const VisibleState& state, const Observation& obs,
                          std::optional<bool> overall_best) const = 0;
    virtual std::string name() const = 0;
    // Throws SpecMismatch when the policy was built for a different instance.
    virtual void check_spec(const ProblemSpec&) const {}
};

// Immutable, cheaply copyable handle; safe to share across threads.
class Policy {
public:
    Policy() = default;
    explicit Policy(std::shared_ptr<const PolicyImpl> impl, bool pairwise_ready = false)
        : impl_(std::move(impl)), pairwise_ready_(pairwise_ready) {}

    using DecideFn = std::function<Action(const VisibleState&, const Observation&, std::optional<bool>)>;
    static Policy from_function(std::string name, DecideFn fn);

    Action decide(const VisibleState& state, const Observation& obs,
                  std::optional<bool> overall_best = std::nullopt) const {
        return impl_->decide(state, obs, overall_best);
    }
    std::string name() const { return impl_ ? impl_->name() : "<empty>"; }
    void check_spec(const ProblemSpec& spec) const { impl_->check_spec(spec); }
    Policy with_pairwise_ready() const { return Policy(impl_, true); }
    explicit operator bool() const { return static_cast<bool>(impl_); }

    template <class T>
    const T* as() const { return dynamic_cast<const T*>(impl_.get()); }

    // Set by pairwise_cost_adapter; required to run under ComparisonModel::Pairwise.
    bool pairwise_ready() const { return pairwise_ready_; }

private:
    std::shared_ptr<const PolicyImpl> impl_;
    bool pairwise_ready_ = false;
};

namespace detail {
class FunctionPolicy final : public PolicyImpl {
public:
    FunctionPolicy(std::string name, Policy::DecideFn fn) : name_(std::move(name)), fn_(std::move(fn)) {}
    Action decide(const VisibleState& s, const Observation& o, std::optional<bool> r) const override {
        return fn_(s, o, r);
    }
    std::string name() const override { return name_; }

private:
    std::string name_;
    Policy::DecideFn fn_;
};
} // namespace detail

inline Policy Policy::from_function(std::string name, DecideFn fn) {
    return Policy(std::make_shared<detail::FunctionPolicy>(std::move(name), std::move(fn)));
}

namespace detail {
inline int draw_group(SplitMix64& rng, std::span<const double> probs) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
        acc += probs[k];
        if (u < acc) return static_cast<int>(k) + 1;
    }
    return static_cast<int>(probs.size());
}
} // namespace detail

// Uniform permutation (Fisher-Yates) followed by i.i.d. group labels, from one
// SplitMix64 stream keyed by `seed`.
inline ArrivalSequence sample_arrival(const ProblemSpec& spec, std::uint64_t seed) {
    spec.validate();
    const auto n = static_cast<std::size_t>(spec.n_candidates);
    SplitMix64 rng(mix64(seed));
    ArrivalSequence seq;
    seq.global_ranks.resize(n);
    std::iota(seq.global_ranks.begin(), seq.global_ranks.end(), 1);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(seq.global_ranks[i - 1], seq.global_ranks[j]);
    }
    seq.groups.resize(n);
    for (auto& g : seq.groups) g = detail::draw_group(rng, spec.group_probs);
    return seq;
}

// 1{r_t = 1} for t = state.step, by scanning the prefix.
inline Observation observe(const ArrivalSequence& seq, const VisibleState& state) {
    const int t = state.step;
    const int g = seq.group_at(t);
    const int r = seq.rank_at(t);
    bool best = true;
    for (int s = 1; s < t && best; ++s)
        if (seq.group_at(s) == g && seq.rank_at(s) < r) best = false;
    return {t, g, best};
}

// Paid signal 1{R_t = 1}. The caller is responsible for charging the budget.
inline bool query_overall(const ArrivalSequence& seq, const VisibleState& state) {
    if (state.budget_left <= 0) throw QueryWithoutBudget("overall query with zero budget");
    const int t = state.step;
    const int r = seq.rank_at(t);
    for (int s = 1; s < t; ++s)
        if (seq.rank_at(s) < r) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Arrival sources consumed by run_policy. A source yields one arrival per call
// to next() and answers, once stopped, whether the stopped candidate is the best
// of all N.

struct Arrival {
    int group;
    bool is_group_best;
    bool is_overall_best;
};

template <class S>
concept ArrivalSource = requires(S s) {
    { s.size() } -> std::convertible_to<int>;
    { s.next() } -> std::same_as<Arrival>;
    { s.current_is_global_best() } -> std::same_as<bool>;
};

// Replays a materialized ArrivalSequence with O(1) work per step.
class SequenceSource {
public:
    SequenceSource(const ArrivalSequence& seq, int n_groups)
        : seq_(&seq), group_best_(static_cast<std::size_t>(n_groups) + 1, 0) {}

    int size() const { return seq_->size(); }

    Arrival next() {
        ++t_;
        const int g = seq_->group_at(t_);
        const int r = seq_->rank_at(t_);
        int& gb = group_best_[static_cast<std::size_t>(g)];
        const bool in_group = gb == 0 || r < gb;
        const bool overall = overall_best_ == 0 || r < overall_best_;
        if (in_group) gb = r;
        if (overall) overall_best_ = r;
        return {g, in_group, overall};
    }

    bool current_is_global_best() const { return seq_->rank_at(t_) == 1; }

private:
    const ArrivalSequence* seq_;
    std::vector<int> group_best_;
    int overall_best_ = 0;
    int t_ = 0;
};

// Lazily generated arrivals with i.i.d. uniform values; the relative order is a
// uniform permutation. After a stop at step t, "best of all N" is decided with a
// single draw: the maximum of the N - t unseen values is below x with
// probability x^(N-t).
class StreamSource {
public:
    StreamSource(const ProblemSpec& spec, std::uint64_t seed)
        : rng_(mix64(seed)), probs_(spec.group_probs), n_(spec.n_candidates),
          group_max_(static_cast<std::size_t>(spec.n_groups) + 1, -1.0) {}

    int size() const { return n_; }

    Arrival next() {
        ++t_;
        x_ = rng_.uniform();
        const int g = detail::draw_group(rng_, probs_);
        double& gm = group_max_[static_cast<std::size_t>(g)];
        const bool in_group = x_ > gm;
        const bool overall = x_ > overall_max_;
        if (in_group) gm = x_;
        if (overall) overall_max_ = x_;
        return {g, in_group, overall};
    }

    bool current_is_global_best() {
        if (x_ < overall_max_) return false;
        const int remaining = n_ - t_;
        if (remaining == 0) return true;
        return rng_.uniform() < std::pow(x_, remaining);
    }

private:
    SplitMix64 rng_;
    std::span<const double> probs_;
    int n_;
    std::vector<double> group_max_;
    double overall_max_ = -1.0;
    double x_ = 0.0;
    int t_ = 0;
};

namespace detail {

// Budget accounting for one trial. Under the pairwise model with K >= 3 the
// first overall query runs a K-1 comparison tournament over the group maxima;
// afterwards the overall maximum is tracked at one comparison per in-group
// record. With K <= 2 one comparison always settles 1{R_t = 1}.
class CostLedger {
public:
    CostLedger(const ProblemSpec& spec)
        : pairwise_(spec.comparison_model == ComparisonModel::Pairwise && spec.n_groups >= 3),
          first_cost_(spec.n_groups - 1) {}

    // Units charged for an overall query at this step.
    int query_cost() const { return pairwise_ && !tracking_ ? first_cost_ : 1; }

    void on_query() { tracking_ = true; }

    // Units charged to keep the tracked maximum current when an in-group record
    // arrives and no query was made.
    int record_update_cost(int budget_left) const {
        return pairwise_ && tracking_ && budget_left > 0 ? 1 : 0;
    }

    bool pairwise() const { return pairwise_; }

private:
    bool pairwise_;
    int first_cost_;
    bool tracking_ = false;
};

} // namespace detail

// Run one trial. Throws IllegalAction (QueryWithoutBudget, BudgetInsufficient)
// when the policy asks for a query it cannot pay for or compares twice.
template <ArrivalSource Source>
TrialOutcome run_policy(Source& source, const Policy& policy, const ProblemSpec& spec) {
    if (spec.comparison_model == ComparisonModel::Pairwise && !policy.pairwise_ready())
        throw SpecMismatch("pairwise model requires a policy wrapped by pairwise_cost_adapter");
    policy.check_spec(spec);

    const int n = source.size();
    SimState state;
    state.budget_left = spec.budget;
    state.group_counts.assign(static_cast<std::size_t>(spec.n_groups), 0);
    detail::CostLedger ledger(spec);
    TrialOutcome out;

    for (int t = 1; t <= n; ++t) {
        state.step = t;
        const Arrival a = source.next();
        const Observation obs{t, a.group, a.is_group_best};
        const VisibleState& visible = state;

        Action act = policy.decide(visible, obs, std::nullopt);
        bool queried = false;
        if (act == Action::Compare) {
            const int cost = ledger.query_cost();
            if (state.budget_left <= 0)
                throw QueryWithoutBudget("compare requested at step " + std::to_string(t) + " with zero budget");
            if (state.budget_left < cost)
                throw BudgetInsufficient("first overall query needs " + std::to_string(cost) +
                                         " comparisons, budget left " + std::to_string(state.budget_left));
            state.budget_left -= cost;
            out.comparisons_used += cost;
            ledger.on_query();
            if (!out.first_compare_time) out.first_compare_time = t;
            queried = true;
            act = policy.decide(visible, obs, a.is_overall_best);
            if (act == Action::Compare)
                throw IllegalAction("second compare at step " + std::to_string(t));
        }
        if (act == Action::Stop) {
            out.stop_time = t;
            out.success = source.current_is_global_best();
            return out;
        }
        if (a.is_group_best && !queried) {
            const int upd = ledger.record_update_cost(state.budget_left);
            state.budget_left -= upd;
            out.comparisons_used += upd;
        }
        ++state.group_counts[static_cast<std::size_t>(a.group - 1)];
        if (a.is_overall_best) state.best_group = a.group;
    }
    return out;
}

inline TrialOutcome run_policy(const ArrivalSequence& seq, const Policy& policy, const ProblemSpec& spec) {
    SequenceSource src(seq, spec.n_groups);
    return run_policy(src, policy, spec);
}

} // namespace bsec
