#include "ftfusion/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ftfusion/fusion.hpp"

namespace ftfusion {

double PiecewiseDensity::mass() const {
    double total = 0.0;
    for (std::size_t k = 0; k < levels.size(); ++k)
        total += levels[k] * (breakpoints[k + 1] - breakpoints[k]);
    return total;
}

double PiecewiseDensity::first_moment() const {
    double total = 0.0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const double a = breakpoints[k], b = breakpoints[k + 1];
        total += levels[k] * 0.5 * (b - a) * (b + a);
    }
    return total;
}

double PiecewiseDensity::at(double x) const {
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
    if (it == breakpoints.begin() || it == breakpoints.end()) return 0.0;
    const auto k = static_cast<std::size_t>(it - breakpoints.begin()) - 1;
    return x > breakpoints[k] ? levels[k] : 0.0;
}

int lattice_precision(const Interval& reading, int x_max) {
    const double width = reading.width();
    const double tol = 1e-9 * x_max;
    if (!(width > 0.0)) throw std::domain_error("reading has no width");
    const double implied = 2.0 * x_max / width;
    const long precision = std::lround(implied);
    if (precision < 1 || precision > x_max || std::abs(implied - static_cast<double>(precision)) > 1e-9 * implied)
        throw std::domain_error("reading width is not 2*x_max/d for an integer d in [1, x_max]");
    const int p = static_cast<int>(precision);
    const double cell = (reading.lo + x_max) / width;
    const long d = std::lround(cell) + 1;
    if (d < 1 || d > p || std::abs(cell - static_cast<double>(d - 1)) > 1e-9 * p ||
        std::abs(reading.lo - cell_lower(static_cast<int>(d), p, x_max)) > tol ||
        std::abs(reading.hi - cell_upper(static_cast<int>(d), p, x_max)) > tol)
        throw std::domain_error("reading endpoints are off the cell lattice");
    return p;
}

PiecewiseDensity posterior_density(AgentReadings readings, const ScenarioParams& params) {
    const int n = static_cast<int>(readings.size());
    if (n != params.n)
        throw std::invalid_argument("posterior_density: expected " + std::to_string(params.n) +
                                    " readings, got " + std::to_string(n));
    if (params.tau < 0 || params.tau >= n) throw std::invalid_argument("posterior_density requires tau < n");
    if (n > 63) throw std::invalid_argument("posterior_density supports at most 63 sensors");

    const double x_max = params.x_max;
    std::vector<int> precision(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        precision[static_cast<std::size_t>(i)] = lattice_precision(readings[static_cast<std::size_t>(i)], params.x_max);

    PiecewiseDensity density;
    density.breakpoints = {-x_max, x_max};
    for (const auto& iv : readings) {
        density.breakpoints.push_back(iv.lo);
        density.breakpoints.push_back(iv.hi);
    }
    std::sort(density.breakpoints.begin(), density.breakpoints.end());
    density.breakpoints.erase(std::unique(density.breakpoints.begin(), density.breakpoints.end()),
                              density.breakpoints.end());
    density.levels.assign(density.breakpoints.size() - 1, 0.0);

    // Per pattern and per piece: P(fault pattern) * f_X(x) * prod over sensors
    // of P(reading | x, role). A truthful sensor reports cell c with
    // probability P(d) * 1{x in c} = (1/x_max) 1{x in c}; a faulty one with
    // P(d) * P(cell | d) = 1/(x_max * d) regardless of x.
    double n_choose_tau = 1.0;
    for (int k = 1; k <= params.tau; ++k) n_choose_tau = n_choose_tau * (n - params.tau + k) / k;
    const double prefix = (1.0 / n_choose_tau) * (1.0 / (2.0 * x_max));

    for (std::size_t k = 0; k < density.levels.size(); ++k) {
        const double probe = 0.5 * (density.breakpoints[k] + density.breakpoints[k + 1]);
        double level = 0.0;
        for_each_subset(n, params.tau, [&](std::uint64_t faulty_mask) {
            double term = prefix;
            for (int i = 0; i < n && term != 0.0; ++i) {
                const auto& iv = readings[static_cast<std::size_t>(i)];
                if (faulty_mask >> i & 1U) {
                    term *= 1.0 / (x_max * precision[static_cast<std::size_t>(i)]);
                } else {
                    term *= iv.contains(probe) ? 1.0 / x_max : 0.0;
                }
            }
            level += term;
        });
        density.levels[k] = level;
    }
    return density;
}

double posterior_mean_exact(AgentReadings readings, const ScenarioParams& params) {
    const auto density = posterior_density(readings, params);
    const double mass = density.mass();
    if (!(mass > 0.0))
        throw InconsistentReadingsError("no fault pattern is consistent with the readings");
    return density.first_moment() / mass;
}

}  // namespace ftfusion
