#pragma once

// Monte Carlo estimates of per-agent MSE and pairwise consensus gaps.
// Every algorithm in one evaluate() call sees the same trial stream.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ftfusion/fusion.hpp"
#include "ftfusion/scenario.hpp"

namespace ftfusion {

enum class AlgorithmKind { marzullo, bi, gbi_oneopt, linear, constant, posterior_mean };

struct AlgorithmSpec {
    AlgorithmKind kind = AlgorithmKind::gbi_oneopt;
    std::string label;
    std::vector<LinearCoefficients> coeffs;  // per agent, kind == linear only
    std::optional<double> constant_value;    // kind == constant only
    MarzulloVariant marzullo = MarzulloVariant::literal;

    static AlgorithmSpec marzullo_literal();
    static AlgorithmSpec brooks_iyengar();
    static AlgorithmSpec gbi();
    static AlgorithmSpec oracle();
    static AlgorithmSpec constant(double value, std::string label = "constant");
    static AlgorithmSpec linear(std::vector<LinearCoefficients> per_agent, std::string label = "linear");

    /// Throws std::invalid_argument if the optional fields do not match kind.
    void validate(int agents) const;
};

std::string to_string(AlgorithmKind kind);

struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

struct MetricsReport {
    std::string algorithm;
    int tau = 0;
    double lambda = 0.0;
    std::vector<Estimate> mse;  // per agent
    std::vector<Estimate> cns;  // per unordered pair, (0,1), (0,2), ..., (1,2), ...
    Estimate objective;
    std::uint64_t trials = 0;
    std::uint64_t bi_fallbacks = 0;       // trials x agents where BI found no n - tau region
    std::uint64_t gbi_degenerate = 0;     // trials x agents where all GBI weights vanished

    /// lambda * sum mse + (1 - lambda)/(m - 1) * sum over ordered pairs of cns.
    double recomputed_objective() const;
};

/// Per-trial squared errors, kept so that paired comparisons between
/// algorithms can be made after the fact.
struct EvaluationSamples {
    std::size_t trials = 0;
    std::size_t agents = 0;
    /// [algorithm][trial * agents + agent] = (X - Xhat_j)^2
    std::vector<std::vector<double>> squared_error;
    /// [algorithm][trial * pairs + pair] = (Xhat_j - Xhat_j')^2
    std::vector<std::vector<double>> squared_gap;
    /// [algorithm][trial * agents + agent] = Xhat_j
    std::vector<std::vector<double>> estimates;

    std::size_t pairs() const noexcept { return agents * (agents - 1) / 2; }
};

struct Evaluation {
    std::vector<MetricsReport> reports;
    EvaluationSamples samples;
};

struct EvaluateOptions {
    unsigned threads = 0;  // 0 = hardware concurrency
    bool keep_estimates = false;
};

/// Throws std::invalid_argument if trials < 100 or an algorithm spec is invalid.
std::vector<MetricsReport> evaluate(const std::vector<AlgorithmSpec>& algos, const ScenarioParams& params,
                                    double lambda, std::uint64_t trials);

Evaluation evaluate_detailed(const std::vector<AlgorithmSpec>& algos, const ScenarioParams& params,
                             double lambda, std::uint64_t trials, const EvaluateOptions& options = {});

/// Mean and standard error of a - b for paired per-trial values.
Estimate paired_difference(const std::vector<double>& a, const std::vector<double>& b);

/// Per-trial values of one column: the squared error of `agent`, or the
/// squared gap of `pair`, for algorithm `algo`.
std::vector<double> mse_column(const EvaluationSamples& s, std::size_t algo, std::size_t agent);
std::vector<double> cns_column(const EvaluationSamples& s, std::size_t algo, std::size_t pair);

/// Recomputes objective fields of `report` for a different lambda, using
/// the stored per-trial samples of algorithm `algo`.
MetricsReport with_lambda(const MetricsReport& report, const EvaluationSamples& samples, std::size_t algo,
                          double lambda);

/// Estimate of one agent under `spec`; flags are incremented on fallbacks.
double apply_algorithm(const AlgorithmSpec& spec, const TrialData& trial, std::size_t agent,
                       const ScenarioParams& params, bool* bi_fallback = nullptr,
                       bool* gbi_degenerate = nullptr);

}  // namespace ftfusion
