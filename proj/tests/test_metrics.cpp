#include <doctest.h>

#include <cmath>

#include "ftfusion/metrics.hpp"
#include "ftfusion/optimal.hpp"

using namespace ftfusion;

namespace {

ScenarioParams scenario(int n, int m, int tau, std::uint64_t seed = 21) {
    ScenarioParams p;
    p.n = n;
    p.m = m;
    p.tau = tau;
    p.x_max = 5;
    p.seed = seed;
    return p;
}

}  // namespace

TEST_CASE("constant estimator") {
    const auto reports = evaluate({AlgorithmSpec::constant(0.0)}, scenario(5, 2, 1), 0.5, 20'000);
    const auto& r = reports[0];
    for (const auto& e : r.mse) CHECK(std::abs(e.mean - 25.0 / 3.0) <= 3.0 * e.stderr_);
    CHECK(r.cns[0].mean == 0.0);
    CHECK(r.cns[0].stderr_ == 0.0);
}

TEST_CASE("no faults means no disagreement") {
    const std::vector<AlgorithmSpec> algos{AlgorithmSpec::marzullo_literal(), AlgorithmSpec::brooks_iyengar(),
                                           AlgorithmSpec::gbi(),
                                           AlgorithmSpec::linear(std::vector<LinearCoefficients>(
                                               3, LinearCoefficients::uniform(6, 0.05, 0.07, 0.1)))};
    for (const auto& r : evaluate(algos, scenario(6, 3, 0), 0.5, 500)) {
        for (const auto& c : r.cns) CHECK(c.mean == 0.0);
        CHECK(r.cns.size() == 3);
    }
}

TEST_CASE("gbi agrees with the exact posterior mean trial by trial") {
    EvaluateOptions opts;
    opts.keep_estimates = true;
    const auto ev = evaluate_detailed({AlgorithmSpec::gbi(), AlgorithmSpec::oracle()}, scenario(5, 2, 2), 0.5, 10'000, opts);
    CHECK(std::abs(ev.reports[0].mse[0].mean - ev.reports[1].mse[0].mean) < 1e-9);
    CHECK(std::abs(ev.reports[0].mse[1].mean - ev.reports[1].mse[1].mean) < 1e-9);
    double worst = 0.0;
    for (std::size_t k = 0; k < ev.samples.estimates[0].size(); ++k)
        worst = std::max(worst, std::abs(ev.samples.estimates[0][k] - ev.samples.estimates[1][k]));
    CHECK(worst < 1e-9);
}

TEST_CASE("algorithms share trials and results do not depend on thread count") {
    const std::vector<AlgorithmSpec> algos{AlgorithmSpec::brooks_iyengar(), AlgorithmSpec::brooks_iyengar()};
    EvaluateOptions one, many;
    one.threads = 1;
    many.threads = 5;
    one.keep_estimates = many.keep_estimates = true;
    const auto a = evaluate_detailed(algos, scenario(7, 2, 3), 0.3, 1234, one);
    const auto b = evaluate_detailed(algos, scenario(7, 2, 3), 0.3, 1234, many);
    // Same algorithm twice in one call sees the same trials.
    CHECK(a.samples.estimates[0] == a.samples.estimates[1]);
    CHECK(a.samples.squared_error == b.samples.squared_error);
    CHECK(a.reports[0].mse[0].mean == b.reports[0].mse[0].mean);
    CHECK(a.reports[0].objective.mean == b.reports[0].objective.mean);
}

TEST_CASE("reported objective is the weighted combination of its parts") {
    const auto reports = evaluate({AlgorithmSpec::gbi(), AlgorithmSpec::marzullo_literal()}, scenario(6, 3, 2), 0.7, 800);
    for (const auto& r : reports) {
        double expected = 0.0;
        for (const auto& e : r.mse) expected += 0.7 * e.mean;
        for (const auto& c : r.cns) expected += 0.3 / 2.0 * 2.0 * c.mean;  // ordered pairs count twice
        CHECK(r.objective.mean == doctest::Approx(expected).epsilon(1e-12));
        CHECK(r.recomputed_objective() == doctest::Approx(r.objective.mean).epsilon(1e-12));
    }
}

TEST_CASE("with_lambda re-weights stored samples") {
    const auto ev = evaluate_detailed({AlgorithmSpec::gbi()}, scenario(6, 2, 2), 0.5, 600);
    const auto r = with_lambda(ev.reports[0], ev.samples, 0, 0.9);
    CHECK(r.lambda == 0.9);
    CHECK(r.mse[0].mean == ev.reports[0].mse[0].mean);
    CHECK(r.objective.mean == doctest::Approx(0.9 * (r.mse[0].mean + r.mse[1].mean) + 0.1 * 2.0 * r.cns[0].mean));
}

TEST_CASE("gbi has the lowest mse") {
    for (int tau : {1, 3, 5}) {
        const std::vector<AlgorithmSpec> algos{AlgorithmSpec::gbi(), AlgorithmSpec::brooks_iyengar(),
                                               AlgorithmSpec::marzullo_literal(), AlgorithmSpec::constant(0.0)};
        const auto ev = evaluate_detailed(algos, scenario(8, 2, tau), 0.5, 4000);
        for (std::size_t a = 1; a < algos.size(); ++a)
            for (std::size_t j = 0; j < 2; ++j) {
                const auto d = paired_difference(mse_column(ev.samples, 0, j), mse_column(ev.samples, a, j));
                CHECK(d.mean <= 2.0 * d.stderr_);
            }
    }
}

TEST_CASE("paired difference") {
    const auto d = paired_difference({1.0, 2.0, 3.0, 4.0}, {0.5, 1.0, 2.5, 3.0});
    CHECK(d.mean == doctest::Approx(0.75));
    // Differences 0.5, 1, 0.5, 1: sample sd = sqrt(1/12), stderr = sd / 2.
    CHECK(d.stderr_ == doctest::Approx(std::sqrt(1.0 / 12.0) / 2.0));
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(evaluate({AlgorithmSpec::gbi()}, scenario(5, 2, 1), 0.5, 99), std::invalid_argument);
    AlgorithmSpec bad = AlgorithmSpec::gbi();
    bad.constant_value = 3.0;
    CHECK_THROWS_AS(evaluate({bad}, scenario(5, 2, 1), 0.5, 200), std::invalid_argument);
    CHECK_THROWS_AS(evaluate({AlgorithmSpec::linear({})}, scenario(5, 2, 1), 0.5, 200), std::invalid_argument);
}
