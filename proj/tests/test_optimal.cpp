#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "ftfusion/metrics.hpp"
#include "ftfusion/optimal.hpp"
#include "moment_helpers.hpp"
#include "stats_helpers.hpp"

using namespace ftfusion;

namespace {

ScenarioParams scenario(int n, int tau, int x_max, std::uint64_t seed = 1) {
    ScenarioParams p;
    p.n = n;
    p.m = 2;
    p.tau = tau;
    p.x_max = x_max;
    p.seed = seed;
    return p;
}

// Exact Var(L1) and Cov(L1, X) under the model with no faults, by summing
// over precisions and cells.
struct ExactLowerMoments {
    double var_l;
    double cov_lx;
};

ExactLowerMoments exact_lower_moments(int x_max) {
    double el = 0.0, el2 = 0.0, elx = 0.0;
    for (int d = 1; d <= x_max; ++d) {
        const double pd = 1.0 / x_max;
        for (int c = 1; c <= d; ++c) {
            const double lo = -x_max + 2.0 * x_max * (c - 1) / d;
            const double hi = -x_max + 2.0 * x_max * c / d;
            const double pc = 1.0 / d;  // P(X in cell)
            el += pd * pc * lo;
            el2 += pd * pc * lo * lo;
            elx += pd * pc * lo * 0.5 * (lo + hi);
        }
    }
    return {el2 - el * el, elx};  // E[X] = 0
}

MomentSet feasible_symmetric_moments() {
    MomentSet m;
    m.mean_x = 0.0;
    m.var_x = 1.0;
    m.mean_l = -0.5;
    m.mean_u = 0.5;
    m.var_l = m.var_u = 0.01;
    m.cov_ll = m.cov_uu = 0.005;
    m.cov_lu_same = 0.009;
    m.cov_lu_cross = 0.0045;
    m.cov_lx = m.cov_ux = 0.05;
    m.sample_count = 1000;
    return m;
}

}  // namespace

TEST_CASE("amplitude solution closed cases") {
    RandomStream rng(4);
    for (std::size_t m : {2u, 3u, 5u}) {
        const auto set = random_moment_set(rng, m);
        const auto one = amplitude_solution(set.dm, set.mean_x, 1.0);
        CHECK(one.a_matrix == Matrix::identity(m));
        CHECK(one.c == set.dm.target);
        CHECK(one.b == std::vector<double>(m, set.mean_x));

        const auto zero = amplitude_solution(set.dm, set.mean_x, 0.0);
        CHECK(zero.c == std::vector<double>(m, 0.0));
        CHECK(zero.theta == std::vector<double>(m, 0.0));
    }

    DirectionMoments dm{Matrix(2, 2, 1.0), {0.8, 0.8}};
    const auto s = amplitude_solution(dm, 0.0, 0.5);
    CHECK(s.c[0] == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(s.c[1] == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(s.a_matrix(0, 1) == -0.5);
}

TEST_CASE("amplitude solution is stationary and locally minimal") {
    RandomStream rng(11);
    for (int set_index = 0; set_index < 100; ++set_index) {
        for (std::size_t m : {2u, 3u}) {
            const auto set = random_moment_set(rng, m);
            for (double lambda : {0.1, 0.5, 0.9}) {
                const auto sol = amplitude_solution(set.dm, set.mean_x, lambda);
                const auto grad = amplitude_gradient(set.dm, lambda, sol.c);
                double scale = 0.0;
                for (double t : set.dm.target) scale = std::max(scale, std::abs(t));
                for (double g : grad) CHECK(std::abs(g) < 1e-6 * std::max(1.0, scale));

                const double best = amplitude_objective(set.dm, set.mean_x, set.var_x, lambda, sol.c, sol.b);
                for (std::size_t j = 0; j < m; ++j)
                    for (double f : {0.99, 1.01}) {
                        auto c = sol.c;
                        c[j] *= f;
                        CHECK(amplitude_objective(set.dm, set.mean_x, set.var_x, lambda, c, sol.b) >= best);
                        auto b = sol.b;
                        b[j] += f - 1.0;
                        CHECK(amplitude_objective(set.dm, set.mean_x, set.var_x, lambda, sol.c, b) > best);
                    }
            }
        }
    }
}

TEST_CASE("amplitude solution refuses an ill-conditioned system") {
    DirectionMoments dm{Matrix(2, 2, 1.0), {0.3, 0.3}};
    try {
        amplitude_solution(dm, 0.0, 1e-12);
        FAIL("expected SingularMatrixError");
    } catch (const SingularMatrixError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("lambda") != std::string::npos);
        CHECK(msg.find("cross") != std::string::npos);
    }
}

TEST_CASE("amplitudes scale with the target") {
    const auto p = scenario(5, 1, 5, 3);
    std::vector<double> x, x2;
    std::vector<std::vector<double>> dirs(2), dirs2(2);
    for (std::uint64_t t = 0; t < 5000; ++t) {
        const auto trial = generate_trial(p, StreamDomain::test, t);
        x.push_back(trial.x);
        x2.push_back(2.0 * trial.x);
        for (std::size_t j = 0; j < 2; ++j) {
            double s = 0.0;
            for (const auto& iv : trial.readings.agent(j)) s += iv.lo + 0.3 * iv.hi;
            dirs[j].push_back(s);
            dirs2[j].push_back(2.0 * s);
        }
    }
    const auto a = amplitude_solution(direction_moments(x, dirs), 0.0, 0.5);
    const auto b = amplitude_solution(direction_moments(x2, dirs2), 0.0, 0.5);
    for (std::size_t j = 0; j < 2; ++j) CHECK(b.c[j] == doctest::Approx(2.0 * a.c[j]).epsilon(1e-9));
}

TEST_CASE("estimate_moments") {
    SUBCASE("single cell readings are constant") {
        const auto m = estimate_moments(scenario(4, 1, 1), 2000);
        CHECK(m.var_l == 0.0);
        CHECK(m.cov_ll == 0.0);
        CHECK(m.cov_lu_same == 0.0);
        CHECK(m.cov_lx == 0.0);
        CHECK(m.mean_l == -1.0);
        CHECK(m.mean_u == 1.0);
    }
    SUBCASE("agreement with exact moments") {
        for (int x_max : {2, 5}) {
            const auto exact = exact_lower_moments(x_max);
            for (int tau : {0, 2}) {
                const auto m = estimate_moments(scenario(6, tau, x_max), 200'000);
                CHECK(m.var_l == doctest::Approx(exact.var_l).epsilon(0.02));
                // Faulty readings carry no information about X.
                CHECK(m.cov_lx == doctest::Approx(exact.cov_lx * (1.0 - tau / 6.0)).epsilon(0.03));
                CHECK(m.cov_lx > 0.0);
                CHECK(std::abs(m.mean_x) < 3.0 * std::sqrt(x_max * x_max / 3.0 / 200'000.0));
                CHECK(m.sample_count == 200'000);
            }
        }
        CHECK(exact_lower_moments(2).cov_lx == doctest::Approx(0.5));
    }
    CHECK_THROWS_AS(estimate_moments(scenario(4, 1, 5), 999), std::invalid_argument);
}

TEST_CASE("prop4 with uninformative readings") {
    auto mom = feasible_symmetric_moments();
    mom.cov_lx = mom.cov_ux = 0.0;
    const auto sol = solve_prop4(mom, 0.5, 2);
    CHECK(sol.theta[0] == 0.0);
    CHECK(sol.theta[1] == 0.0);
    CHECK(sol.objective_value == doctest::Approx(0.0).scale(1.0));
    for (int j = 0; j < 2; ++j)
        CHECK(2 * (sol.eps[j] * mom.mean_l + sol.del[j] * mom.mean_u) + sol.gamma[j] == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("prop4 on agent-symmetric feasible moments") {
    const auto mom = feasible_symmetric_moments();
    for (double lambda : {0.1, 0.5, 0.9}) {
        const auto sol = solve_prop4(mom, lambda, 2);
        CHECK(prop4_residual(sol, mom, 2) < 1e-6);
        const double swapped = prop4_objective(mom, lambda, 2, {sol.eps[1], sol.eps[0]}, {sol.del[1], sol.del[0]});
        CHECK(swapped == doctest::Approx(sol.objective_value).epsilon(1e-12));

        // The objective is symmetric but has poles at z = +-1 and is not
        // bounded below, so the minimizer over the box is not the symmetric
        // point: scan the diagonal eps1 = eps2 and compare.
        double best_diag = std::numeric_limits<double>::infinity();
        const double half = 1.0 / std::sqrt(2 * mom.var_l);
        for (double e = -half; e <= half; e += half / 2000) {
            const auto q = prop4_quadratic(mom, 2, e);
            const double disc = q[1] * q[1] - 4 * q[0] * q[2];
            if (disc < 0) continue;
            for (double sign : {-1.0, 1.0}) {
                const double d = (-q[1] + sign * std::sqrt(disc)) / (2 * q[0]);
                best_diag = std::min(best_diag, prop4_objective(mom, lambda, 2, {e, e}, {d, d}));
            }
        }
        CHECK(sol.objective_value <= best_diag + 1e-9 * std::abs(best_diag));
    }
    CHECK_THROWS_AS(solve_prop4(mom, 0.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(solve_prop4(mom, 1.0, 2), std::invalid_argument);
}

TEST_CASE("prop4 quadratic has no real root near the origin in the reference scenario") {
    const auto mom = estimate_moments(scenario(10, 3, 5), 20'000);
    CHECK_THROWS_AS(solve_prop4(mom, 0.5, 10), InfeasibleError);
}

TEST_CASE("empirical linear fit matches the normal equations") {
    for (double lambda : {0.1, 0.5, 0.9, 1.0}) {
        const auto sample = collect_linear_sample(scenario(6, 2, 5, 9), 20'000, StreamDomain::fitting);
        const auto fit = fit_linear_empirical(sample, lambda, 9);
        const auto direct = linear_fit_normal_equations(sample, lambda);
        const double direct_obj = linear_sample_objective(sample, lambda, direct);
        CHECK(fit.objective <= direct_obj * (1.0 + 1e-8));
        CHECK(fit.objective >= direct_obj * (1.0 - 1e-8));
        for (std::size_t k = 0; k < direct.size(); ++k)
            CHECK(fit.coeffs[k] == doctest::Approx(direct[k]).epsilon(1e-3).scale(0.01));
    }
}

TEST_CASE("empirical linear fit degenerate regimes") {
    SUBCASE("lambda = 0 collapses to a constant") {
        const auto p = scenario(10, 3, 5, 2);
        const auto fit = fit_linear_empirical(p, 0.0, 20'000);
        for (double c : fit.coeffs) CHECK(std::abs(c) < 1e-3);
        const auto reports = evaluate({AlgorithmSpec::linear(fit.agents)}, p, 0.0, 5000);
        CHECK(reports[0].cns[0].mean < 1e-3 * 25.0 / 3.0);
    }
    SUBCASE("single-cell readings give the zero estimator") {
        const auto p = scenario(4, 1, 1, 2);
        const auto fit = fit_linear_empirical(p, 0.5, 10'000);
        const std::vector<Interval> r(4, Interval{-1.0, 1.0});
        for (const auto& a : fit.agents) CHECK(fuse_linear(r, a) == doctest::Approx(0.0).scale(1.0));
    }
    SUBCASE("cannot beat the posterior mean at lambda = 1") {
        const auto p = scenario(10, 3, 5, 2);
        const auto fit = fit_linear_empirical(p, 1.0, 20'000);
        const auto ev = evaluate_detailed({AlgorithmSpec::gbi(), AlgorithmSpec::linear(fit.agents)}, p, 1.0, 20'000);
        for (std::size_t j = 0; j < 2; ++j) {
            const auto d = paired_difference(mse_column(ev.samples, 1, j), mse_column(ev.samples, 0, j));
            CHECK(d.mean >= -2.0 * d.stderr_);
        }
    }
    CHECK_THROWS_AS(fit_linear_empirical(scenario(4, 1, 5), 0.5, 9999), std::invalid_argument);
    CHECK_THROWS_AS(fit_linear_empirical(scenario(4, 1, 5), 1.5, 20'000), std::invalid_argument);
}
