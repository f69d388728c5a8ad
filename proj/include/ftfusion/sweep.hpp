#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftfusion/config.hpp"
#include "ftfusion/metrics.hpp"
#include "ftfusion/optimal.hpp"

namespace ftfusion {

/// Relative gap allowed between the two-agent closed-form linear fuser and
/// the empirical fit before the empirical one is used instead.
inline constexpr double kProp4Tolerance = 0.05;

inline constexpr double kOracleTolerance = 1e-9;

/// Outcome of choosing coefficients for one linear@lambda row.
struct LinearChoice {
    std::vector<LinearCoefficients> agents;
    std::string source;       // "prop4" or "empirical"
    std::vector<std::string> flags;
    double empirical_objective = 0.0;
    double prop4_objective = 0.0;  // sample objective of the closed-form point; NaN if unavailable
    std::string prop4_error;
};

/// Fits the empirical optimum and tries the closed-form solver; keeps the
/// closed form when its sample objective is within kProp4Tolerance.
LinearChoice choose_linear(const ScenarioParams& params, double lambda, std::uint64_t samples);

struct SweepRow {
    MetricsReport report;
    std::uint64_t seed = 0;
    std::vector<std::string> flags;
};

struct SweepResult {
    int agents = 0;
    std::vector<SweepRow> rows;
};

SweepResult run_sweep(const RunConfig& config);

void write_csv(std::ostream& out, const SweepResult& result);
void write_json(std::ostream& out, const SweepResult& result);

/// Writes to config.output_path in config.format. Throws std::runtime_error
/// if the file cannot be written.
void write_report(const RunConfig& config, const SweepResult& result);

struct OracleMismatch {
    int tau = 0;
    std::uint64_t trial = 0;
    std::uint64_t trial_seed = 0;
    std::size_t agent = 0;
    double gbi = 0.0;
    double exact = 0.0;
};

struct OracleCheckResult {
    double max_deviation = 0.0;
    std::uint64_t comparisons = 0;
    std::vector<OracleMismatch> mismatches;

    bool passed() const noexcept { return mismatches.empty(); }
};

struct OracleCheckOptions {
    /// Test hook: scale the weight of the last positive GBI term by 1.5.
    bool corrupt_gbi_weight = false;
    double tolerance = kOracleTolerance;
};

/// Throws ConfigError("n", ...) if n > 8.
OracleCheckResult oracle_check(const RunConfig& config, const OracleCheckOptions& options = {});

/// Both linear fits for one lambda per configured tau, as JSON.
nlohmann::json fit_linear_report(const RunConfig& config, double lambda);

nlohmann::json to_json(const MetricsReport& report);

}  // namespace ftfusion
