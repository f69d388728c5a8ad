#include "ftfusion/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ftfusion/oracle.hpp"
#include "ftfusion/parallel.hpp"

namespace ftfusion {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::vector<std::string>& items, char sep) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += sep;
        out += s;
    }
    return out;
}

ScenarioParams scenario_for(const RunConfig& config, int tau) {
    ScenarioParams p;
    p.n = config.n;
    p.m = config.m;
    p.tau = tau;
    p.x_max = config.x_max;
    p.seed = config.seed;
    return p;
}

AlgorithmSpec to_spec(const AlgorithmSelector& sel, std::vector<LinearCoefficients> coeffs) {
    AlgorithmSpec spec;
    spec.kind = sel.kind;
    spec.label = sel.label;
    spec.marzullo = sel.marzullo;
    spec.constant_value = sel.constant;
    if (sel.kind == AlgorithmKind::linear) spec.coeffs = std::move(coeffs);
    return spec;
}

}  // namespace

LinearChoice choose_linear(const ScenarioParams& params, double lambda, std::uint64_t samples) {
    LinearChoice choice;
    const auto sample = collect_linear_sample(params, samples, StreamDomain::fitting);
    const auto fit = fit_linear_empirical(sample, lambda, params.seed);
    choice.empirical_objective = fit.objective;
    choice.prop4_objective = std::numeric_limits<double>::quiet_NaN();
    choice.agents = fit.agents;
    choice.source = "empirical";

    if (params.m != 2 || !(lambda > 0.0 && lambda < 1.0)) {
        choice.flags.push_back("prop4_not_applicable");
        return choice;
    }
    try {
        const auto moments = estimate_moments(params, samples);
        const auto sol = solve_prop4(moments, lambda, params.n);
        const std::vector<double> coeffs{sol.eps[0], sol.del[0], sol.eps[1], sol.del[1]};
        choice.prop4_objective = linear_sample_objective(sample, lambda, coeffs);
        const double gap = (choice.prop4_objective - fit.objective) / std::abs(fit.objective);
        if (gap <= kProp4Tolerance) {
            choice.agents = sol.coefficients(params.n);
            choice.source = "prop4";
        } else {
            choice.flags.push_back("prop4_substituted");
        }
    } catch (const InfeasibleError& e) {
        choice.prop4_error = e.what();
        choice.flags.push_back("prop4_infeasible");
    }
    return choice;
}

SweepResult run_sweep(const RunConfig& config) {
    config.validate();
    SweepResult result;
    result.agents = config.m;
    const auto selectors = config.expanded_algorithms();
    if (selectors.empty()) return result;

    for (int tau : config.taus) {
        const auto params = scenario_for(config, tau);
        std::vector<AlgorithmSpec> specs;
        std::vector<std::vector<std::string>> flags;
        std::vector<double> row_lambda;
        for (const auto& sel : selectors) {
            std::vector<std::string> f;
            std::vector<LinearCoefficients> coeffs;
            if (sel.kind == AlgorithmKind::linear) {
                auto choice = choose_linear(params, *sel.lambda, config.moment_samples);
                coeffs = std::move(choice.agents);
                f = std::move(choice.flags);
                f.insert(f.begin(), "source=" + choice.source);
                row_lambda.push_back(*sel.lambda);
            } else {
                row_lambda.push_back(config.objective_lambda);
            }
            specs.push_back(to_spec(sel, std::move(coeffs)));
            flags.push_back(std::move(f));
        }

        EvaluateOptions opts;
        opts.threads = config.threads;
        const auto eval = evaluate_detailed(specs, params, config.objective_lambda, config.trials, opts);
        for (std::size_t a = 0; a < specs.size(); ++a) {
            SweepRow row;
            row.report = with_lambda(eval.reports[a], eval.samples, a, row_lambda[a]);
            row.seed = config.seed;
            row.flags = flags[a];
            if (row.report.bi_fallbacks) row.flags.push_back("bi_fallbacks=" + std::to_string(row.report.bi_fallbacks));
            if (row.report.gbi_degenerate)
                row.flags.push_back("gbi_degenerate=" + std::to_string(row.report.gbi_degenerate));
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

void write_csv(std::ostream& out, const SweepResult& result) {
    const int m = result.agents;
    std::vector<std::string> header{"algorithm", "tau", "lambda"};
    for (int j = 1; j <= m; ++j) header.push_back("mse_agent_" + std::to_string(j));
    for (int j = 1; j <= m; ++j) header.push_back("mse_stderr_" + std::to_string(j));
    std::vector<std::string> pair_names;
    for (int j = 1; j <= m; ++j)
        for (int k = j + 1; k <= m; ++k) pair_names.push_back(std::to_string(j) + "_" + std::to_string(k));
    for (const auto& p : pair_names) header.push_back("cns_pair_" + p);
    for (const auto& p : pair_names) header.push_back("cns_stderr_" + p);
    for (const char* tail : {"objective", "trials", "seed", "flags"}) header.emplace_back(tail);
    out << join(header, ',') << "\r\n";

    for (const auto& row : result.rows) {
        const auto& r = row.report;
        std::vector<std::string> cells{r.algorithm, std::to_string(r.tau), num(r.lambda)};
        for (const auto& e : r.mse) cells.push_back(num(e.mean));
        for (const auto& e : r.mse) cells.push_back(num(e.stderr_));
        for (const auto& e : r.cns) cells.push_back(num(e.mean));
        for (const auto& e : r.cns) cells.push_back(num(e.stderr_));
        cells.push_back(num(r.objective.mean));
        cells.push_back(std::to_string(r.trials));
        cells.push_back(std::to_string(row.seed));
        cells.push_back(join(row.flags, ';'));
        out << join(cells, ',') << "\r\n";
    }
}

nlohmann::json to_json(const MetricsReport& r) {
    nlohmann::json j;
    j["algorithm"] = r.algorithm;
    j["tau"] = r.tau;
    j["lambda"] = r.lambda;
    auto estimates = [](const std::vector<Estimate>& es) {
        auto arr = nlohmann::json::array();
        for (const auto& e : es) arr.push_back({{"mean", e.mean}, {"stderr", e.stderr_}});
        return arr;
    };
    j["mse"] = estimates(r.mse);
    j["cns"] = estimates(r.cns);
    j["objective"] = {{"mean", r.objective.mean}, {"stderr", r.objective.stderr_}};
    j["trials"] = r.trials;
    j["bi_fallbacks"] = r.bi_fallbacks;
    j["gbi_degenerate"] = r.gbi_degenerate;
    return j;
}

void write_json(std::ostream& out, const SweepResult& result) {
    auto arr = nlohmann::json::array();
    for (const auto& row : result.rows) {
        auto j = to_json(row.report);
        j["seed"] = row.seed;
        j["flags"] = row.flags;
        arr.push_back(std::move(j));
    }
    out << arr.dump(2) << '\n';
}

void write_report(const RunConfig& config, const SweepResult& result) {
    std::ofstream out(config.output_path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output path '" + config.output_path + "' for writing");
    if (config.format == OutputFormat::csv) write_csv(out, result);
    else write_json(out, result);
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + config.output_path + "'");
}

OracleCheckResult oracle_check(const RunConfig& config, const OracleCheckOptions& options) {
    config.validate();
    if (config.n > 8) throw ConfigError("n", "oracle-check enumerates all fault patterns and needs n <= 8");

    OracleCheckResult result;
    for (int tau : config.taus) {
        const auto params = scenario_for(config, tau);
        std::vector<std::vector<OracleMismatch>> per_trial(config.trials);
        std::vector<double> worst(config.trials, 0.0);
        parallel_for(config.trials, config.threads, [&](std::size_t t) {
            const auto seed = derive_seed(params.seed, StreamDomain::oracle_check, t);
            RandomStream rng(seed);
            const auto trial = generate_trial(params, rng);
            for (std::size_t j = 0; j < trial.readings.agents(); ++j) {
                const auto readings = trial.readings.agent(j);
                auto weights = gbi_weights_oneopt(readings, tau);
                if (options.corrupt_gbi_weight) {
                    for (auto it = weights.terms.rbegin(); it != weights.terms.rend(); ++it)
                        if (it->weight > 0.0) {
                            it->weight *= 1.5;
                            break;
                        }
                }
                const double gbi = fuse_gbi(readings, weights);
                const double exact = posterior_mean_exact(readings, params);
                const double dev = std::abs(gbi - exact);
                worst[t] = std::max(worst[t], dev);
                if (!(dev <= options.tolerance))
                    per_trial[t].push_back({tau, t, seed, j, gbi, exact});
            }
        });
        for (std::size_t t = 0; t < config.trials; ++t) {
            result.max_deviation = std::max(result.max_deviation, worst[t]);
            for (auto& mm : per_trial[t]) result.mismatches.push_back(mm);
        }
        result.comparisons += config.trials * static_cast<std::uint64_t>(config.m);
    }
    return result;
}

nlohmann::json fit_linear_report(const RunConfig& config, double lambda) {
    config.validate();
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda", "must lie in [0, 1]");
    if (config.moment_samples < 10000) throw ConfigError("moment_samples", "must be at least 10000");

    auto out = nlohmann::json::array();
    for (int tau : config.taus) {
        const auto params = scenario_for(config, tau);
        const auto sample = collect_linear_sample(params, config.moment_samples, StreamDomain::fitting);
        const auto fit = fit_linear_empirical(sample, lambda, params.seed);

        nlohmann::json entry;
        entry["tau"] = tau;
        entry["lambda"] = lambda;
        entry["seed"] = config.seed;
        nlohmann::json emp;
        emp["objective"] = fit.objective;
        auto agents = nlohmann::json::array();
        for (int j = 0; j < config.m; ++j)
            agents.push_back({{"eps", fit.coeffs[2 * j]}, {"del", fit.coeffs[2 * j + 1]}, {"gamma", fit.agents[j].gamma}});
        emp["agents"] = agents;
        entry["empirical"] = emp;

        nlohmann::json p4;
        if (config.m == 2 && lambda > 0.0 && lambda < 1.0) {
            try {
                const auto moments = estimate_moments(params, config.moment_samples);
                const auto sol = solve_prop4(moments, lambda, config.n);
                const std::vector<double> coeffs{sol.eps[0], sol.del[0], sol.eps[1], sol.del[1]};
                const double sample_obj = linear_sample_objective(sample, lambda, coeffs);
                p4["eps"] = sol.eps;
                p4["del"] = sol.del;
                p4["gamma"] = sol.gamma;
                p4["z"] = sol.z;
                p4["closed_form_objective"] = sol.objective_value;
                p4["sample_objective"] = sample_obj;
                p4["residual"] = prop4_residual(sol, moments, config.n);
                p4["relative_gap"] = (sample_obj - fit.objective) / std::abs(fit.objective);
                p4["within_tolerance"] = (sample_obj - fit.objective) / std::abs(fit.objective) <= kProp4Tolerance;
            } catch (const InfeasibleError& e) {
                p4["error"] = e.what();
            }
        } else {
            p4["error"] = "closed form needs m = 2 and 0 < lambda < 1";
        }
        entry["prop4"] = p4;
        out.push_back(std::move(entry));
    }
    return out;
}

}  // namespace ftfusion
