#pragma once

// Run configuration: a flat `key = value` text file, one experiment per file.
//
//   # comments start with '#'
//   n = 10
//   m = 2
//   x_max = 5
//   taus = 1..7             # or a comma list: 1,3,5
//   lambdas = 0.1, 0.5, 0.9
//   algorithms = linear, bi, marzullo, gbi_oneopt
//   objective_lambda = 0.5  # lambda used in the objective column of non-linear rows
//   trials = 20000
//   moment_samples = 20000
//   seed = 2024
//   output = results.csv
//   format = csv            # or json
//   threads = 0             # 0 = all hardware threads
//
// Algorithm selectors: marzullo, marzullo_classical, bi, gbi_oneopt,
// posterior_mean, constant@<value>, linear (one per entry of `lambdas`),
// linear@<lambda>.
//
// FTFUSION_SEED and FTFUSION_TRIALS override seed and trials.

#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftfusion/fusion.hpp"
#include "ftfusion/metrics.hpp"

namespace ftfusion {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error("config field '" + field + "': " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

enum class OutputFormat { csv, json };

struct AlgorithmSelector {
    AlgorithmKind kind = AlgorithmKind::gbi_oneopt;
    std::optional<double> lambda;    // linear@lambda
    std::optional<double> constant;  // constant@value
    MarzulloVariant marzullo = MarzulloVariant::literal;
    std::string label;
};

/// Parses one selector token; throws ConfigError("algorithms", ...) on junk.
AlgorithmSelector parse_algorithm_selector(const std::string& token);

struct RunConfig {
    int n = 10;
    int m = 2;
    int x_max = 5;
    std::uint64_t seed = 1;
    std::vector<int> taus{1};
    std::vector<double> lambdas{0.1, 0.5, 0.9};
    std::vector<AlgorithmSelector> algorithms;
    double objective_lambda = 0.5;
    std::uint64_t trials = 20000;
    std::uint64_t moment_samples = 20000;
    std::string output_path;
    OutputFormat format = OutputFormat::csv;
    unsigned threads = 0;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;

    /// Linear selectors expanded: `linear` becomes one entry per lambda.
    std::vector<AlgorithmSelector> expanded_algorithms() const;
};

RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Applies FTFUSION_SEED / FTFUSION_TRIALS if set.
void apply_environment(RunConfig& config);

}  // namespace ftfusion
