#include <doctest.h>

#include <cmath>
#include <vector>

#include "ftfusion/fusion.hpp"
#include "ftfusion/oracle.hpp"
#include "ftfusion/scenario.hpp"

using namespace ftfusion;

namespace {

ScenarioParams params_for(int n, int tau, int x_max) {
    ScenarioParams p;
    p.n = n;
    p.m = 2;
    p.tau = tau;
    p.x_max = x_max;
    return p;
}

}  // namespace

TEST_CASE("single reading gives its midpoint") {
    for (int x_max = 1; x_max <= 6; ++x_max)
        for (int d = 1; d <= x_max; ++d)
            for (int c = 1; c <= d; ++c) {
                const std::vector<Interval> r{{cell_lower(c, d, x_max), cell_upper(c, d, x_max)}};
                CHECK(posterior_mean_exact(r, params_for(1, 0, x_max)) ==
                      doctest::Approx(r[0].midpoint()).epsilon(1e-14).scale(1.0));
            }
}

TEST_CASE("two truthful readings give the intersection midpoint") {
    // [1,3] has precision 5; [5/3, 5] is the top cell of precision 3.
    const std::vector<Interval> r{{cell_lower(4, 5, 5), cell_upper(4, 5, 5)}, {cell_lower(3, 3, 5), cell_upper(3, 3, 5)}};
    REQUIRE(r[0] == Interval{1.0, 3.0});
    CHECK(posterior_mean_exact(r, params_for(2, 0, 5)) == doctest::Approx(0.5 * (5.0 / 3.0 + 3.0)).epsilon(1e-14));
    // Nested cells: the smaller cell wins.
    const std::vector<Interval> nested{{-1.0, 1.0}, {-5.0, 5.0}};
    CHECK(posterior_mean_exact(nested, params_for(2, 0, 5)) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("off-lattice and inconsistent readings are rejected") {
    // [0,2] has width 2 (precision 5) but its cells start at -5, -3, -1, ...
    const std::vector<Interval> off{{0.0, 2.0}, {-1.0, 1.0}};
    CHECK_THROWS_AS(posterior_mean_exact(off, params_for(2, 0, 5)), std::domain_error);
    const std::vector<Interval> too_fine{{-0.5, 0.5}};
    CHECK_THROWS_AS(posterior_mean_exact(too_fine, params_for(1, 0, 5)), std::domain_error);
    const std::vector<Interval> disjoint{{-5.0, -3.0}, {3.0, 5.0}};
    CHECK_THROWS_AS(posterior_mean_exact(disjoint, params_for(2, 0, 5)), InconsistentReadingsError);
    CHECK(lattice_precision({-5.0, 5.0}, 5) == 1);
    CHECK(lattice_precision({cell_lower(2, 3, 5), cell_upper(2, 3, 5)}, 5) == 3);
}

TEST_CASE("density is normalized and matches fine-grid quadrature") {
    for (std::uint64_t inst = 0; inst < 100; ++inst) {
        RandomStream rng = RandomStream::derived(31, StreamDomain::test, inst);
        const int n = static_cast<int>(rng.uniform_int(2, 5));
        const int tau = static_cast<int>(rng.uniform_int(0, n - 1));
        const int x_max = static_cast<int>(rng.uniform_int(2, 6));
        auto p = params_for(n, tau, x_max);
        p.tau = std::min(tau, n - 2);
        const auto trial = generate_trial(p, rng);
        const auto readings = trial.readings.agent(0);
        const auto dens = posterior_density(readings, p);
        const double mass = dens.mass();
        REQUIRE(mass > 0.0);

        double total = 0.0;
        for (std::size_t k = 0; k < dens.levels.size(); ++k)
            total += dens.levels[k] / mass * (dens.breakpoints[k + 1] - dens.breakpoints[k]);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

        // Midpoint rule with 10^6 cells.
        const int cells = 1'000'000;
        const double h = 2.0 * x_max / cells;
        double m0 = 0.0, m1 = 0.0;
        for (int c = 0; c < cells; ++c) {
            const double x = -x_max + (c + 0.5) * h;
            const double f = dens.at(x);
            m0 += f * h;
            m1 += x * f * h;
        }
        const double exact = posterior_mean_exact(readings, p);
        CHECK(std::abs(m1 / m0 - exact) < 1e-4);
        CHECK(exact >= -x_max);
        CHECK(exact <= x_max);
    }
}

TEST_CASE("posterior mean equals one-optimal gbi on generated trials") {
    double worst = 0.0;
    for (std::uint64_t t = 0; t < 500; ++t) {
        const int n = 2 + static_cast<int>(t % 4);
        const int tau = static_cast<int>((t / 4) % static_cast<std::uint64_t>(n - 1));
        auto p = params_for(n, tau, 3 + static_cast<int>(t % 3));
        p.seed = 8;
        const auto trial = generate_trial(p, StreamDomain::test, t);
        for (std::size_t j = 0; j < 2; ++j) {
            const auto r = trial.readings.agent(j);
            const double gbi = fuse_gbi(r, gbi_weights_oneopt(r, tau));
            const double exact = posterior_mean_exact(r, p);
            worst = std::max(worst, std::abs(gbi - exact));
        }
    }
    CHECK(worst < 1e-9);
}
