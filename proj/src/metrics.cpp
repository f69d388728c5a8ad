#include "ftfusion/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "ftfusion/oracle.hpp"
#include "ftfusion/parallel.hpp"

namespace ftfusion {

AlgorithmSpec AlgorithmSpec::marzullo_literal() { return {AlgorithmKind::marzullo, "marzullo", {}, {}}; }
AlgorithmSpec AlgorithmSpec::brooks_iyengar() { return {AlgorithmKind::bi, "bi", {}, {}}; }
AlgorithmSpec AlgorithmSpec::gbi() { return {AlgorithmKind::gbi_oneopt, "gbi_oneopt", {}, {}}; }
AlgorithmSpec AlgorithmSpec::oracle() { return {AlgorithmKind::posterior_mean, "posterior_mean", {}, {}}; }

AlgorithmSpec AlgorithmSpec::constant(double value, std::string label) {
    return {AlgorithmKind::constant, std::move(label), {}, value};
}

AlgorithmSpec AlgorithmSpec::linear(std::vector<LinearCoefficients> per_agent, std::string label) {
    return {AlgorithmKind::linear, std::move(label), std::move(per_agent), {}};
}

void AlgorithmSpec::validate(int agents) const {
    const bool linear = kind == AlgorithmKind::linear;
    const bool constant = kind == AlgorithmKind::constant;
    if (linear != !coeffs.empty())
        throw std::invalid_argument("algorithm '" + label + "': coefficients are required for linear and only for linear");
    if (linear && coeffs.size() != static_cast<std::size_t>(agents))
        throw std::invalid_argument("algorithm '" + label + "': need one coefficient set per agent");
    if (constant != constant_value.has_value())
        throw std::invalid_argument("algorithm '" + label + "': constant_value is required for constant and only for constant");
}

std::string to_string(AlgorithmKind kind) {
    switch (kind) {
        case AlgorithmKind::marzullo: return "marzullo";
        case AlgorithmKind::bi: return "bi";
        case AlgorithmKind::gbi_oneopt: return "gbi_oneopt";
        case AlgorithmKind::linear: return "linear";
        case AlgorithmKind::constant: return "constant";
        case AlgorithmKind::posterior_mean: return "posterior_mean";
    }
    return "unknown";
}

double MetricsReport::recomputed_objective() const {
    double accuracy = 0.0, consensus = 0.0;
    for (const auto& e : mse) accuracy += e.mean;
    for (const auto& e : cns) consensus += 2.0 * e.mean;
    const double weight = mse.size() > 1 ? (1.0 - lambda) / static_cast<double>(mse.size() - 1) : 0.0;
    return lambda * accuracy + weight * consensus;
}

double apply_algorithm(const AlgorithmSpec& spec, const TrialData& trial, std::size_t agent,
                       const ScenarioParams& params, bool* bi_fallback, bool* gbi_degenerate) {
    const auto readings = trial.readings.agent(agent);
    switch (spec.kind) {
        case AlgorithmKind::marzullo: return fuse_marzullo(readings, params.tau, spec.marzullo);
        case AlgorithmKind::bi: {
            const auto r = fuse_bi_checked(readings, params.tau);
            if (r.fallback && bi_fallback) *bi_fallback = true;
            return r.value;
        }
        case AlgorithmKind::gbi_oneopt: {
            try {
                return fuse_gbi(readings, gbi_weights_oneopt(readings, params.tau));
            } catch (const DegenerateInputError&) {
                if (gbi_degenerate) *gbi_degenerate = true;
                return fuse_bi(readings, params.tau);
            }
        }
        case AlgorithmKind::linear: return fuse_linear(readings, spec.coeffs.at(agent));
        case AlgorithmKind::constant: return *spec.constant_value;
        case AlgorithmKind::posterior_mean: return posterior_mean_exact(readings, params);
    }
    throw std::logic_error("apply_algorithm: unknown kind");
}

namespace {

Estimate summarize(const std::vector<double>& values) {
    Estimate out;
    const double count = static_cast<double>(values.size());
    if (values.empty()) return out;
    for (double v : values) out.mean += v;
    out.mean /= count;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.stderr_ = std::sqrt(ss / (count - 1.0) / count);
    }
    return out;
}

std::vector<double> objective_column(const EvaluationSamples& s, std::size_t algo, double lambda) {
    const std::size_t m = s.agents, pairs = s.pairs();
    const double weight = m > 1 ? (1.0 - lambda) / static_cast<double>(m - 1) : 0.0;
    std::vector<double> out(s.trials);
    for (std::size_t t = 0; t < s.trials; ++t) {
        double accuracy = 0.0, consensus = 0.0;
        for (std::size_t j = 0; j < m; ++j) accuracy += s.squared_error[algo][t * m + j];
        for (std::size_t p = 0; p < pairs; ++p) consensus += 2.0 * s.squared_gap[algo][t * pairs + p];
        out[t] = lambda * accuracy + weight * consensus;
    }
    return out;
}

}  // namespace

std::vector<double> mse_column(const EvaluationSamples& s, std::size_t algo, std::size_t agent) {
    std::vector<double> out(s.trials);
    for (std::size_t t = 0; t < s.trials; ++t) out[t] = s.squared_error.at(algo)[t * s.agents + agent];
    return out;
}

std::vector<double> cns_column(const EvaluationSamples& s, std::size_t algo, std::size_t pair) {
    std::vector<double> out(s.trials);
    const std::size_t pairs = s.pairs();
    for (std::size_t t = 0; t < s.trials; ++t) out[t] = s.squared_gap.at(algo)[t * pairs + pair];
    return out;
}

Estimate paired_difference(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("paired_difference: length mismatch");
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    return summarize(diff);
}

MetricsReport with_lambda(const MetricsReport& report, const EvaluationSamples& samples, std::size_t algo,
                          double lambda) {
    MetricsReport out = report;
    out.lambda = lambda;
    out.objective.stderr_ = summarize(objective_column(samples, algo, lambda)).stderr_;
    out.objective.mean = out.recomputed_objective();
    return out;
}

Evaluation evaluate_detailed(const std::vector<AlgorithmSpec>& algos, const ScenarioParams& params,
                             double lambda, std::uint64_t trials, const EvaluateOptions& options) {
    params.validate();
    if (trials < 100) throw std::invalid_argument("evaluate requires at least 100 trials");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("evaluate: lambda must lie in [0, 1]");
    for (const auto& a : algos) a.validate(params.m);

    const std::size_t m = static_cast<std::size_t>(params.m);
    const std::size_t count = algos.size();
    Evaluation eval;
    auto& s = eval.samples;
    s.trials = trials;
    s.agents = m;
    const std::size_t pairs = s.pairs();
    s.squared_error.assign(count, std::vector<double>(trials * m));
    s.squared_gap.assign(count, std::vector<double>(trials * pairs));
    s.estimates.assign(count, std::vector<double>(trials * m));

    // Flags are stored per (algorithm, trial) so the merge is order-independent.
    std::vector<std::vector<std::uint8_t>> bi_flags(count, std::vector<std::uint8_t>(trials * m, 0));
    std::vector<std::vector<std::uint8_t>> gbi_flags(count, std::vector<std::uint8_t>(trials * m, 0));

    parallel_for(trials, options.threads, [&](std::size_t t) {
        const auto trial = generate_trial(params, StreamDomain::evaluation, t);
        std::vector<double> est(m);
        for (std::size_t a = 0; a < count; ++a) {
            for (std::size_t j = 0; j < m; ++j) {
                bool bi_fb = false, gbi_fb = false;
                est[j] = apply_algorithm(algos[a], trial, j, params, &bi_fb, &gbi_fb);
                const double err = trial.x - est[j];
                s.squared_error[a][t * m + j] = err * err;
                s.estimates[a][t * m + j] = est[j];
                bi_flags[a][t * m + j] = bi_fb;
                gbi_flags[a][t * m + j] = gbi_fb;
            }
            std::size_t p = 0;
            for (std::size_t j = 0; j < m; ++j)
                for (std::size_t k = j + 1; k < m; ++k, ++p) {
                    const double gap = est[j] - est[k];
                    s.squared_gap[a][t * pairs + p] = gap * gap;
                }
        }
    });

    for (std::size_t a = 0; a < count; ++a) {
        MetricsReport r;
        r.algorithm = algos[a].label;
        r.tau = params.tau;
        r.lambda = lambda;
        r.trials = trials;
        for (std::size_t j = 0; j < m; ++j) r.mse.push_back(summarize(mse_column(s, a, j)));
        for (std::size_t p = 0; p < pairs; ++p) r.cns.push_back(summarize(cns_column(s, a, p)));
        for (auto f : bi_flags[a]) r.bi_fallbacks += f;
        for (auto f : gbi_flags[a]) r.gbi_degenerate += f;
        r.objective.stderr_ = summarize(objective_column(s, a, lambda)).stderr_;
        r.objective.mean = r.recomputed_objective();
        eval.reports.push_back(std::move(r));
    }
    if (!options.keep_estimates) s.estimates.clear();
    return eval;
}

std::vector<MetricsReport> evaluate(const std::vector<AlgorithmSpec>& algos, const ScenarioParams& params,
                                    double lambda, std::uint64_t trials) {
    return evaluate_detailed(algos, params, lambda, trials).reports;
}

}  // namespace ftfusion
