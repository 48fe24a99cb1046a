#pragma once

// Command-line front end. run_cli is callable in-process so tests can check
// outputs against the library without spawning processes.
//
//   bsec simulate --N 2000 --K 1 --policy single --alpha 0.3679 --B 0 --trials 100000 --seed 1
//   bsec analytic opt-alpha --K 2 --B 30
//   bsec dp thresholds --N 500 --B 0 --lambda 0.7
//
// Exit codes: 0 ok, 2 invalid flags or domain error, 3 runtime failure.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bsec/bsec.hpp"

namespace bsec::cli {

inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kRuntime = 3;

struct RunConfig {
    std::string command;
    std::string mode; // analytic / dp subcommand

    int n = 0;
    int k = 2;
    int budget = 0;
    std::vector<double> lambda;
    std::string policy;
    double alpha = std::nan("");
    double beta = std::nan("");
    int group = 1;
    std::optional<int> region_budget;
    std::string thresholds_path;
    std::string model = "is-best";
    std::string arrivals = "stream";
    std::string reward = "exact";
    unsigned threads = 0;
    std::uint64_t trials = 100000;
    std::optional<std::uint64_t> seed;
    int grid = 512;
    std::string out;
    std::string format = "csv";
};

namespace detail {

// The JSON config mirrors the flags: {"command": "dp", "mode": "value", "N": 10, "lambda": [0.5], ...}.
// Flags given on the command line win over config entries.
inline std::vector<std::string> merge_config(const nlohmann::json& cfg, std::vector<std::string> args) {
    std::vector<std::string> head;
    const bool has_command = !args.empty() && args.front().rfind("-", 0) != 0;
    if (!has_command) {
        if (!cfg.contains("command")) throw CLI::ValidationError("config", "config needs a \"command\"");
        head.push_back(cfg.at("command").get<std::string>());
        if (cfg.contains("mode")) head.push_back(cfg.at("mode").get<std::string>());
    }
    for (const auto& [key, value] : cfg.items()) {
        if (key == "command" || key == "mode") continue;
        const std::string flag = "--" + key;
        if (std::find(args.begin(), args.end(), flag) != args.end()) continue;
        std::string text;
        if (value.is_array()) {
            for (std::size_t i = 0; i < value.size(); ++i) text += (i ? "," : "") + value[i].dump();
        } else if (value.is_string()) {
            text = value.get<std::string>();
        } else {
            text = value.dump();
        }
        args.push_back(flag);
        args.push_back(text);
    }
    head.insert(head.end(), args.begin(), args.end());
    return head;
}

inline ProblemSpec make_spec(const RunConfig& c) {
    ProblemSpec s;
    s.n_candidates = c.n;
    s.n_groups = c.k;
    s.budget = c.budget;
    if (c.lambda.empty()) {
        s = ProblemSpec::uniform_groups(c.n, c.k, c.budget);
    } else if (c.k == 2 && c.lambda.size() == 1) {
        s.group_probs = {c.lambda[0], 1.0 - c.lambda[0]};
    } else {
        s.group_probs = c.lambda;
    }
    if (c.model == "pairwise") s.comparison_model = ComparisonModel::Pairwise;
    else if (c.model != "is-best") throw DomainError("--model must be is-best or pairwise");
    s.validate();
    return s;
}

inline double lambda1(const RunConfig& c) {
    if (c.lambda.empty()) throw DomainError("--lambda is required");
    return c.lambda[0];
}

inline CompareReward reward_rule(const RunConfig& c) {
    if (c.reward == "exact") return CompareReward::Exact;
    if (c.reward == "published") return CompareReward::AsPublished;
    throw DomainError("--reward must be exact or published");
}

inline void need(bool ok, const char* what) {
    if (!ok) throw DomainError(what);
}

inline void emit_simulate(const RunConfig& c, std::ostream& out) {
    const ProblemSpec spec = make_spec(c);
    need(c.seed.has_value(), "--seed is required for simulate");
    SweepCell cell{spec, {}, c.policy};
    if (c.policy == "single") {
        need(!std::isnan(c.alpha), "--alpha is required for policy single");
        cell.policy = single_threshold(spec, c.alpha);
        cell.alpha = c.alpha;
    } else if (c.policy == "double") {
        need(!std::isnan(c.alpha) && !std::isnan(c.beta), "--alpha and --beta are required for policy double");
        cell.policy = double_threshold(spec, c.alpha, c.beta);
        cell.alpha = c.alpha;
        cell.beta = c.beta;
    } else if (c.policy == "dt") {
        need(!c.thresholds_path.empty(), "--thresholds is required for policy dt");
        std::ifstream in(c.thresholds_path);
        if (!in) throw std::runtime_error("cannot read " + c.thresholds_path);
        cell.policy = dt_policy(spec, nlohmann::json::parse(in).get<DtThresholds>());
    } else if (c.policy == "optimal") {
        if (spec.n_groups != 2) throw DimensionError("policy optimal requires K = 2");
        cell.policy = optimal_policy(compute_tables(spec.n_candidates, spec.budget, spec.group_probs[0], reward_rule(c)));
    } else if (c.policy == "filter") {
        cell.policy = group_filter_baseline(spec, c.group);
    } else {
        throw DomainError("unknown policy '" + c.policy + "'");
    }
    if (spec.comparison_model == ComparisonModel::Pairwise) cell.policy = pairwise_cost_adapter(cell.policy, spec);

    const McOptions opt{c.arrivals == "materialized" ? ArrivalMode::Materialized : ArrivalMode::Stream, c.threads};
    const auto rows = sweep({cell}, c.trials, *c.seed, opt);
    if (c.format == "json") {
        const auto& e = rows.front().estimate;
        nlohmann::json j{{"K", spec.n_groups}, {"B", spec.budget}, {"lambda", spec.group_probs},
                         {"N", spec.n_candidates}, {"policy_id", c.policy}, {"trials", e.trials},
                         {"successes", e.successes}, {"rate", e.rate}, {"ci_low", e.ci_low},
                         {"ci_high", e.ci_high}, {"seed", e.seed}};
        if (!std::isnan(cell.alpha)) j["alpha"] = cell.alpha;
        if (!std::isnan(cell.beta)) j["beta"] = cell.beta;
        out << j.dump(2) << '\n';
    } else {
        write_sweep_csv(out, rows);
    }
}

inline void emit_rows(const RunConfig& c, const std::vector<ValueRow>& rows, std::ostream& out) {
    if (c.format != "json") {
        write_value_csv(out, rows);
        return;
    }
    auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows)
        arr.push_back({{"K", r.K}, {"B", r.B}, {"lambda", num(r.lambda)}, {"alpha", num(r.alpha)},
                       {"beta", num(r.beta)}, {"value", num(r.value)}, {"source", r.source}});
    out << arr.dump(2) << '\n';
}

inline void emit_analytic(const RunConfig& c, std::ostream& out) {
    const double nan = std::nan("");
    const std::string& m = c.mode;
    if (m == "single-limit") {
        need(!std::isnan(c.alpha), "--alpha is required");
        emit_rows(c, {{c.k, c.budget, nan, c.alpha, nan, single_threshold_limit(c.k, c.alpha, c.budget), "analytic"}}, out);
    } else if (m == "single-bound") {
        emit_rows(c, {{c.k, c.budget, nan, 1.0 / std::numbers::e, nan, single_threshold_bound(c.k, c.budget), "analytic"}}, out);
    } else if (m == "opt-alpha") {
        const AlphaOptimum o = optimal_single_alpha(c.k, c.budget);
        emit_rows(c, {{c.k, c.budget, nan, o.alpha, nan, o.value, "analytic"}}, out);
    } else if (m == "double-limit") {
        need(!std::isnan(c.alpha) && !std::isnan(c.beta), "--alpha and --beta are required");
        const double l = lambda1(c);
        emit_rows(c, {{2, c.budget, l, c.alpha, c.beta, double_threshold_limit(c.alpha, c.beta, l, c.budget, c.grid), "analytic"}}, out);
    } else if (m == "corollary-thresholds") {
        const double l = lambda1(c);
        const CorollaryResult r = corollary_thresholds(l, c.budget);
        const double limit = double_threshold_limit(r.thresholds.alpha, r.thresholds.beta, l, c.budget, c.grid);
        if (c.format == "json") {
            out << nlohmann::json{{"K", 2}, {"B", c.budget}, {"lambda", l}, {"alpha", r.thresholds.alpha},
                                  {"beta", r.thresholds.beta}, {"lower_bound", r.lower_bound}, {"limit", limit}}
                       .dump(2)
                << '\n';
        } else {
            const auto prec = out.precision(12);
            out << "K,B,lambda,alpha,beta,lower_bound,limit\n"
                << 2 << ',' << c.budget << ',' << l << ',' << r.thresholds.alpha << ',' << r.thresholds.beta << ','
                << r.lower_bound << ',' << limit << '\n';
            out.precision(prec);
        }
    } else {
        throw DomainError("unknown analytic command '" + m + "'");
    }
}

inline void emit_dp(const RunConfig& c, std::ostream& out) {
    const double l = lambda1(c);
    need(c.n >= 1, "--N is required");
    const DpTables d = compute_tables(c.n, c.budget, l, reward_rule(c));
    const auto prec = out.precision(12);
    const std::string& m = c.mode;
    if (m == "value") {
        if (c.format == "json")
            out << nlohmann::json{{"N", c.n}, {"B", c.budget}, {"lambda", l}, {"initial_success", initial_success(d)}}.dump(2) << '\n';
        else
            out << "N,B,lambda,initial_success\n" << c.n << ',' << c.budget << ',' << l << ',' << initial_success(d) << '\n';
    } else if (m == "region") {
        need(c.group == 1 || c.group == 2, "--group must be 1 or 2");
        bool header = true;
        for (int b = 0; b <= c.budget; ++b) {
            if (c.region_budget && *c.region_budget != b) continue;
            write_region_csv(out, d, b, c.group, header);
            header = false;
        }
        need(!header, "--b outside 0..B");
    } else if (m == "thresholds") {
        const DtThresholdEstimate e = estimate_dt_thresholds(d, l);
        if (c.format == "json") {
            out << nlohmann::json{{"N", c.n}, {"B", c.budget}, {"lambda", l}, {"alpha", e.alpha}, {"beta", e.beta}}.dump(2) << '\n';
        } else {
            out << "b,alpha_star,beta_star\n";
            for (int b = 0; b <= c.budget; ++b) out << b << ',' << e.alpha[b] << ',' << e.beta[b] << '\n';
        }
    } else if (m == "values") {
        write_values_csv(out, d);
    } else if (m == "policy-mc") {
        need(c.seed.has_value(), "--seed is required for policy-mc");
        const ProblemSpec spec = ProblemSpec::two_groups(c.n, l, c.budget);
        const McOptions opt{c.arrivals == "materialized" ? ArrivalMode::Materialized : ArrivalMode::Stream, c.threads};
        out.precision(prec);
        write_sweep_csv(out, sweep({{spec, optimal_policy(d, spec), "optimal"}}, c.trials, *c.seed, opt));
    } else {
        throw DomainError("unknown dp command '" + m + "'");
    }
    out.precision(prec);
}

} // namespace detail

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Budgeted multi-group secretary toolkit", "bsec"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON file with flag values");

    auto add_common = [&](CLI::App* s) {
        s->add_option("--B", c.budget, "comparison budget")->check(CLI::NonNegativeNumber);
        s->add_option("--lambda", c.lambda, "group probabilities (K=2: P(group 1) suffices)")->delimiter(',');
        s->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        s->add_option("--out", c.out, "output file (default stdout)");
        s->add_option("--config", config_path, "JSON file with flag values");
    };

    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimate of a policy's success rate");
    add_common(sim);
    sim->add_option("--N", c.n, "number of candidates")->required()->check(CLI::PositiveNumber);
    sim->add_option("--K", c.k, "number of groups")->check(CLI::PositiveNumber);
    sim->add_option("--policy", c.policy, "single, double, dt, optimal or filter")
        ->required()
        ->check(CLI::IsMember({"single", "double", "dt", "optimal", "filter"}));
    sim->add_option("--alpha", c.alpha, "threshold (fraction of N)");
    sim->add_option("--beta", c.beta, "group-2 threshold for policy double");
    sim->add_option("--thresholds", c.thresholds_path, "JSON threshold table for policy dt");
    sim->add_option("--group", c.group, "group kept by policy filter");
    sim->add_option("--trials", c.trials, "number of trials")->check(CLI::PositiveNumber);
    sim->add_option("--seed", c.seed, "base seed")->required();
    sim->add_option("--model", c.model, "is-best or pairwise")->check(CLI::IsMember({"is-best", "pairwise"}));
    sim->add_option("--arrivals", c.arrivals, "stream or materialized")->check(CLI::IsMember({"stream", "materialized"}));
    sim->add_option("--reward", c.reward, "compare reward for policy optimal: exact or published");
    sim->add_option("--threads", c.threads, "worker threads (0 = all cores)");

    auto* ana = app.add_subcommand("analytic", "asymptotic success probabilities");
    ana->add_option("mode", c.mode, "single-limit, single-bound, opt-alpha, double-limit or corollary-thresholds")
        ->required()
        ->check(CLI::IsMember({"single-limit", "single-bound", "opt-alpha", "double-limit", "corollary-thresholds"}));
    add_common(ana);
    ana->add_option("--K", c.k, "number of groups");
    ana->add_option("--alpha", c.alpha, "threshold");
    ana->add_option("--beta", c.beta, "group-2 threshold");
    ana->add_option("--grid", c.grid, "quadrature intervals for the two-group recursion");

    auto* dpc = app.add_subcommand("dp", "optimal memory-less policy for two groups");
    dpc->add_option("mode", c.mode, "value, region, thresholds, values or policy-mc")
        ->required()
        ->check(CLI::IsMember({"value", "region", "thresholds", "values", "policy-mc"}));
    add_common(dpc);
    dpc->add_option("--N", c.n, "number of candidates")->required()->check(CLI::PositiveNumber);
    dpc->add_option("--group", c.group, "group of the acceptance region");
    dpc->add_option("--b", c.region_budget, "single budget level for region (default: all)");
    dpc->add_option("--reward", c.reward, "compare reward: exact or published")->check(CLI::IsMember({"exact", "published"}));
    dpc->add_option("--trials", c.trials, "trials for policy-mc")->check(CLI::PositiveNumber);
    dpc->add_option("--seed", c.seed, "base seed for policy-mc");
    dpc->add_option("--arrivals", c.arrivals, "stream or materialized")->check(CLI::IsMember({"stream", "materialized"}));
    dpc->add_option("--threads", c.threads, "worker threads (0 = all cores)");

    try {
        // Pull --config out first so its values can be spliced in as flags.
        if (auto it = std::find(args.begin(), args.end(), "--config"); it != args.end()) {
            if (it + 1 == args.end()) throw CLI::ArgumentMismatch("--config needs a file path");
            std::ifstream in(*(it + 1));
            if (!in) throw CLI::ValidationError("--config", "cannot read " + *(it + 1));
            const auto cfg = nlohmann::json::parse(in);
            args.erase(it, it + 2);
            args = detail::merge_config(cfg, std::move(args));
        }
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    } catch (const nlohmann::json::exception& e) {
        err << "error: bad config: " << e.what() << '\n';
        return kUsage;
    }

    std::ostringstream buffer;
    try {
        if (sim->parsed()) {
            c.command = "simulate";
            detail::emit_simulate(c, buffer);
        } else if (ana->parsed()) {
            c.command = "analytic";
            detail::emit_analytic(c, buffer);
        } else {
            c.command = "dp";
            detail::emit_dp(c, buffer);
        }
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntime;
    }

    if (c.out.empty()) {
        out << buffer.str();
    } else {
        std::ofstream f(c.out);
        if (!f) {
            err << "error: cannot write " << c.out << '\n';
            return kRuntime;
        }
        f << buffer.str();
    }
    return kOk;
}

inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return run_cli(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

} // namespace bsec::cli
