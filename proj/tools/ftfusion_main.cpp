// ftfusion: command-line front end.
//
//   ftfusion sweep --config run.cfg [--seed S] [--trials T] [--out path]
//   ftfusion oracle-check --config run.cfg [--seed S] [--trials T]
//   ftfusion fit-linear --config run.cfg --lambda 0.5 [--out path]

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ftfusion/config.hpp"
#include "ftfusion/sweep.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Run configuration file")->required();
    cmd->add_option("--seed", args.seed, "Root seed (overrides config and FTFUSION_SEED)");
    cmd->add_option("--trials", args.trials, "Trial count (overrides config and FTFUSION_TRIALS)");
    cmd->add_option("--out", args.out, "Output path (overrides config)");
}

ftfusion::RunConfig resolve(const CommonArgs& args) {
    auto config = ftfusion::load_config(args.config_path);
    ftfusion::apply_environment(config);
    if (args.seed) config.seed = *args.seed;
    if (args.trials) config.trials = *args.trials;
    if (args.out) config.output_path = *args.out;
    return config;
}

int run_sweep(const CommonArgs& args) {
    auto config = resolve(args);
    if (config.output_path.empty()) throw ftfusion::ConfigError("output", "no output path given");
    config.validate();
    // Fail on an unwritable path before spending minutes on the sweep.
    {
        std::ofstream probe(config.output_path, std::ios::app);
        if (!probe) throw std::runtime_error("cannot open output path '" + config.output_path + "' for writing");
    }
    const auto result = ftfusion::run_sweep(config);
    ftfusion::write_report(config, result);
    std::cout << "wrote " << result.rows.size() << " rows to " << config.output_path << '\n';
    return 0;
}

int run_oracle_check(const CommonArgs& args, bool corrupt) {
    const auto config = resolve(args);
    ftfusion::OracleCheckOptions options;
    options.corrupt_gbi_weight = corrupt;
    const auto result = ftfusion::oracle_check(config, options);
    std::printf("comparisons: %llu\nmax |gbi - posterior mean|: %.3e\n",
                static_cast<unsigned long long>(result.comparisons), result.max_deviation);
    constexpr std::size_t kShown = 20;
    for (std::size_t i = 0; i < result.mismatches.size() && i < kShown; ++i) {
        const auto& mm = result.mismatches[i];
        std::printf("mismatch: tau=%d trial=%llu trial_seed=0x%016llx agent=%zu gbi=%.17g exact=%.17g\n", mm.tau,
                    static_cast<unsigned long long>(mm.trial), static_cast<unsigned long long>(mm.trial_seed),
                    mm.agent + 1, mm.gbi, mm.exact);
    }
    if (result.mismatches.size() > kShown)
        std::printf("... %zu more mismatches\n", result.mismatches.size() - kShown);
    std::printf("%s (tolerance %.0e)\n", result.passed() ? "PASS" : "FAIL", options.tolerance);
    return result.passed() ? 0 : 1;
}

int run_fit_linear(const CommonArgs& args, double lambda) {
    const auto config = resolve(args);
    const auto report = ftfusion::fit_linear_report(config, lambda);
    if (args.out) {
        std::ofstream out(*args.out);
        if (!out) throw std::runtime_error("cannot open output path '" + *args.out + "' for writing");
        out << report.dump(2) << '\n';
    } else {
        std::cout << report.dump(2) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fault-tolerant interval sensor fusion experiments"};
    app.require_subcommand(1);

    CommonArgs sweep_args, oracle_args, fit_args;
    auto* sweep = app.add_subcommand("sweep", "Evaluate fusers over the configured taus and write a report");
    add_common(sweep, sweep_args);

    bool corrupt = false;
    auto* oracle = app.add_subcommand("oracle-check", "Compare GBI against the exact posterior mean");
    add_common(oracle, oracle_args);
    oracle->add_flag("--inject-gbi-fault", corrupt, "Corrupt one GBI weight per reading (negative control)")
        ->group("");

    double lambda = 0.5;
    auto* fit = app.add_subcommand("fit-linear", "Fit lambda-optimal linear fusers and report both solvers");
    add_common(fit, fit_args);
    fit->add_option("--lambda", lambda, "Accuracy weight in [0, 1]")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sweep) return run_sweep(sweep_args);
        if (*oracle) return run_oracle_check(oracle_args, corrupt);
        if (*fit) return run_fit_linear(fit_args, lambda);
    } catch (const ftfusion::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
