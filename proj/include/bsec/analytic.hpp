#pragma once

// Asymptotic (N -> infinity) success probabilities of threshold policies and
// the threshold optimizers built on them.
//
// Every closed form below is a sum of truncated exponential remainders
//   1/w - sum_{l<=b} log(1/w)^l / l!  =  (1/w) * P(Poisson(log 1/w) > b),
// so everything is evaluated through Poisson upper tails, which stay accurate
// where the textbook difference cancels catastrophically.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "bsec/errors.hpp"

namespace bsec {

// P(Poisson(x) > b) for x >= 0, b >= 0.
inline double poisson_upper_tail(int b, double x) {
    if (b < 0) return 1.0;
    if (x <= 0.0) return 0.0;
    const double log_x = std::log(x);
    auto pmf = [&](int l) { return std::exp(-x + l * log_x - std::lgamma(l + 1.0)); };
    if (b < x) {
        double cdf = 0.0;
        for (int l = 0; l <= b; ++l) cdf += pmf(l);
        return std::max(0.0, 1.0 - cdf);
    }
    // Past the mode the terms decrease geometrically; sum them directly.
    double tail = 0.0;
    double term = pmf(b + 1);
    for (int l = b + 1; term > 0.0; ++l) {
        tail += term;
        if (term < tail * 1e-18) break;
        term *= x / (l + 1);
    }
    return tail;
}

// S^B(w) = sum_{b=0}^{B} (1/w - sum_{l=0}^{b} log(1/w)^l / l!).
inline double s_sum(double w, int B) {
    if (!(w > 0.0 && w <= 1.0)) throw DomainError("s_sum needs w in (0, 1]");
    if (B < 0) throw DomainError("s_sum needs B >= 0");
    const double x = -std::log(w);
    double acc = 0.0;
    for (int b = 0; b <= B; ++b) acc += poisson_upper_tail(b, x);
    return acc / w;
}

// Classical secretary limit alpha log(1/alpha); also the B = infinity limit for any K.
inline double classical_limit(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
    return -alpha * std::log(alpha);
}

// Single-threshold policy with K >= 2 groups:
//   alpha^K/(K-1) * S-sum at argument alpha^(K-1)
// = alpha/(K-1) * sum_b P(Poisson((K-1) log(1/alpha)) > b).
inline double single_threshold_limit(int K, double alpha, int B) {
    if (K == 1) throw DomainError("single_threshold_limit is defined for K >= 2; use classical_limit");
    if (K < 1) throw DomainError("K must be >= 2");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
    if (B < 0) throw DomainError("B must be >= 0");
    const double x = (K - 1) * -std::log(alpha);
    double acc = 0.0;
    for (int b = 0; b <= B; ++b) acc += poisson_upper_tail(b, x);
    return alpha * acc / (K - 1);
}

// (1/e)(1 - (K-1)^(B+1) / (B+1)!) for the threshold floor(N/e).
inline double single_threshold_bound(int K, int B) {
    if (K < 2) throw DomainError("K must be >= 2");
    if (B < 0) throw DomainError("B must be >= 0");
    const double log_ratio = (B + 1) * std::log(static_cast<double>(K - 1)) - std::lgamma(B + 2.0);
    return (1.0 - std::exp(log_ratio)) / std::numbers::e;
}

namespace detail {

// Maximizes f on [lo, hi], assuming unimodality there.
template <class F>
std::pair<double, double> golden_max(F&& f, double lo, double hi, double tol = 1e-12) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc >= fd) {
            b = d; d = c; fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    return {x, f(x)};
}

// Grid scan over n points of (lo, hi], then golden-section polish on the bracket
// around the best node. Returns the better of polish and grid; ties keep the
// smaller argument.
template <class F>
std::pair<double, double> grid_then_golden(F&& f, double lo, double hi, int n) {
    int best = 1;
    double best_v = -std::numeric_limits<double>::infinity();
    auto node = [&](int i) { return lo + (hi - lo) * i / n; };
    for (int i = 1; i <= n; ++i) {
        const double v = f(node(i));
        if (v > best_v) { best_v = v; best = i; }
    }
    const double a = node(std::max(best - 1, 0)), b = node(std::min(best + 1, n));
    auto [x, v] = golden_max(f, std::max(a, lo + 1e-300), b);
    if (v > best_v) return {x, v};
    return {node(best), best_v};
}

} // namespace detail

struct AlphaOptimum {
    double alpha;
    double value;
};

// Maximizer of single_threshold_limit over alpha in (0, 1]. K = 1 is the
// classical secretary problem: (1/e, 1/e).
inline AlphaOptimum optimal_single_alpha(int K, int B) {
    if (K == 1) return {1.0 / std::numbers::e, 1.0 / std::numbers::e};
    if (K < 1) throw DomainError("K must be >= 1");
    auto f = [&](double a) { return single_threshold_limit(K, a, B); };
    auto [a, v] = detail::grid_then_golden(f, 0.0, 1.0, 1000);
    return {a, v};
}

// ---------------------------------------------------------------------------
// Two groups, double threshold (alpha for group 1, beta for group 2).

struct ThresholdPair {
    double alpha;
    double beta;
};

// phi^b_k(alpha, beta; w) on M+1 uniform nodes of [alpha, beta] for b = 0..B.
struct PhiGrid {
    double alpha = 0.0;
    double beta = 0.0;
    double lambda = 0.0;
    int budget = 0;
    std::vector<double> grid;                // w_0 = alpha .. w_M = beta
    std::vector<std::vector<double>> values;  // values[b][i]  = phi^b_2(w_i)
    std::vector<std::vector<double>> values1; // values1[b][i] = phi^b_1(w_i)

    int m() const { return static_cast<int>(grid.size()) - 1; }
};

namespace detail {
inline void check_pair(double alpha, double beta, double lambda) {
    if (!(alpha > 0.0 && alpha <= beta && beta <= 1.0)) throw DomainError("need 0 < alpha <= beta <= 1");
    if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("lambda must lie in (0, 1)");
}

// Composite trapezoid of f(w_j) over nodes j = i..M.
template <class F>
double trapezoid_tail(const std::vector<double>& grid, int i, F&& f) {
    const int m = static_cast<int>(grid.size()) - 1;
    if (i >= m) return 0.0;
    const double h = grid[1] - grid[0];
    double acc = 0.5 * (f(i) + f(m));
    for (int j = i + 1; j < m; ++j) acc += f(j);
    return acc * h;
}
} // namespace detail

inline PhiGrid phi_grid(double alpha, double beta, double lambda, int B, int M = 512) {
    detail::check_pair(alpha, beta, lambda);
    if (B < 0) throw DomainError("B must be >= 0");
    if (M < 64) throw DomainError("grid size M must be >= 64");

    PhiGrid g;
    g.alpha = alpha;
    g.beta = beta;
    g.lambda = lambda;
    g.budget = B;
    g.grid.resize(static_cast<std::size_t>(M) + 1);
    for (int i = 0; i <= M; ++i) g.grid[i] = alpha + (beta - alpha) * i / M;
    g.grid[M] = beta;

    const double mu = 1.0 - lambda;
    for (int b = 0; b <= B; ++b) {
        const double S = s_sum(beta, b);
        std::vector<double> p2(g.grid.size()), p1(g.grid.size());
        for (int i = 0; i <= M; ++i) {
            const double w = g.grid[i];
            const double den = mu * w + lambda * beta;
            double v2 = -lambda * w * std::log(mu * w / beta + lambda) + mu * beta * w * w * S / den;
            double v1 = lambda * w * std::log(mu + lambda * beta / w) + lambda * w * beta * beta * S / den;
            if (b > 0) {
                const auto& prev = g.values[static_cast<std::size_t>(b - 1)];
                const double i2 = detail::trapezoid_tail(g.grid, i, [&](int j) {
                    const double u = g.grid[j];
                    const double d = mu * w + lambda * u;
                    return (mu * mu * w + lambda * (2.0 - lambda) * u) / (d * d * u * u) * prev[j];
                });
                const double i1 = detail::trapezoid_tail(g.grid, i, [&](int j) {
                    const double u = g.grid[j];
                    const double d = mu * w + lambda * u;
                    return (u - w) * prev[j] / (d * d * u);
                });
                v2 += w * w * i2;
                v1 += lambda * lambda * w * i1;
            }
            p2[i] = v2;
            p1[i] = v1;
        }
        g.values.push_back(std::move(p2));
        g.values1.push_back(std::move(p1));
    }
    return g;
}

// lambda alpha log(beta/alpha) + alpha beta S^B(beta)
//   + 1{B>0} alpha * int_alpha^beta phi^{B-1}_2(u) / u^2 du.
inline double double_threshold_limit(double alpha, double beta, double lambda, int B, int M = 512) {
    detail::check_pair(alpha, beta, lambda);
    if (B < 0) throw DomainError("B must be >= 0");
    double v = lambda * alpha * std::log(beta / alpha) + alpha * beta * s_sum(beta, B);
    if (B > 0 && beta > alpha) {
        const PhiGrid g = phi_grid(alpha, beta, lambda, B - 1, M);
        const auto& prev = g.values.back();
        v += alpha * detail::trapezoid_tail(g.grid, 0, [&](int j) {
            return prev[j] / (g.grid[j] * g.grid[j]);
        });
    }
    return v;
}

// Same quantity through phi^B_1(alpha) + phi^B_2(alpha); independent of the
// closed form above except for shared S-sums.
inline double double_threshold_limit_via_phi(double alpha, double beta, double lambda, int B, int M = 512) {
    const PhiGrid g = phi_grid(alpha, beta, lambda, B, M);
    return g.values.back().front() + g.values1.back().front();
}

struct CorollaryResult {
    ThresholdPair thresholds;
    double lower_bound; // 1/e - min{1/(e (B+1)!), (4/e - 1) lambda (1 - lambda)}
    double objective;   // lambda h log(beta/h) + h beta S^B(beta) at the returned pair
};

// h^B(beta) = min{(beta/e) exp(beta S^B(beta) / lambda), beta}.
inline double corollary_h(double beta, double lambda, int B) {
    const double arg = std::log(beta) - 1.0 + beta * s_sum(beta, B) / lambda;
    return std::min(std::exp(std::min(arg, 0.0)), beta);
}

inline double corollary_objective(double beta, double lambda, int B) {
    const double h = corollary_h(beta, lambda, B);
    return lambda * h * std::log(beta / h) + h * beta * s_sum(beta, B);
}

// Thresholds maximizing the two-group lower-bound objective over beta, with
// alpha = h^B(beta). Defined for lambda >= 1/2; swap the groups otherwise.
inline CorollaryResult corollary_thresholds(double lambda, int B) {
    if (!(lambda >= 0.5 && lambda < 1.0)) throw DomainError("lambda must lie in [0.5, 1); swap groups otherwise");
    if (B < 0) throw DomainError("B must be >= 0");
    auto f = [&](double beta) { return corollary_objective(beta, lambda, B); };
    auto [beta, value] = detail::grid_then_golden(f, 0.0, 1.0, 2000);
    const double penalty = std::min(std::exp(-1.0 - std::lgamma(B + 2.0)),
                                    (4.0 / std::numbers::e - 1.0) * lambda * (1.0 - lambda));
    return {{corollary_h(beta, lambda, B), beta}, 1.0 / std::numbers::e - penalty, value};
}

struct RemainderCheck {
    bool lower_ok;
    bool upper_ok;
    double gap;   // x e^x - sum_{b<=B} (e^x - sum_{l<=b} x^l / l!)
    double bound; // e^x x^(B+2) / (B+1)!
};

// 0 <= gap <= bound. The gap equals sum_{l >= B+2} (l - B - 1) x^l / l!, which is
// summed directly so that small x does not lose every digit to cancellation.
inline RemainderCheck sum_exp_remainder_check(double x, int B) {
    if (!(x > 0.0)) throw DomainError("x must be > 0");
    if (B < 0) throw DomainError("B must be >= 0");
    double term = std::exp((B + 2) * std::log(x) - std::lgamma(B + 3.0)); // x^l / l! at l = B+2
    double gap = 0.0;
    for (int l = B + 2; term > 0.0; ++l) {
        const double add = (l - B - 1) * term;
        gap += add;
        if (l > x && add < gap * 1e-18) break;
        term *= x / (l + 1);
    }
    const double bound = std::exp(x + (B + 2) * std::log(x) - std::lgamma(B + 2.0));
    return {gap >= 0.0, gap <= bound, gap, bound};
}

// One row of an analytic/mc/dp comparison table.
struct ValueRow {
    int K;
    int B;
    double lambda; // NaN when the quantity does not depend on it
    double alpha;
    double beta;   // NaN for single-threshold rows
    double value;
    std::string source; // analytic, mc or dp
};

// CSV: K,B,lambda,alpha,beta,value,source
inline void write_value_csv(std::ostream& os, const std::vector<ValueRow>& rows, bool header = true) {
    if (header) os << "K,B,lambda,alpha,beta,value,source\n";
    auto num = [&](double v) -> std::ostream& {
        if (!std::isnan(v)) os << v;
        return os;
    };
    const auto prec = os.precision(12);
    for (const auto& r : rows) {
        os << r.K << ',' << r.B << ',';
        num(r.lambda) << ',';
        num(r.alpha) << ',';
        num(r.beta) << ',';
        num(r.value) << ',' << r.source << '\n';
    }
    os.precision(prec);
}

} // namespace bsec
