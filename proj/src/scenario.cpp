#include "ftfusion/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ftfusion {

void ScenarioParams::validate() const {
    if (n < 1) throw std::invalid_argument("n must be positive (got " + std::to_string(n) + ")");
    if (m < 1) throw std::invalid_argument("m must be positive (got " + std::to_string(m) + ")");
    if (tau < 0) throw std::invalid_argument("tau must be nonnegative (got " + std::to_string(tau) + ")");
    if (n < tau + 2)
        throw std::invalid_argument("tau must satisfy tau <= n - 2 (n=" + std::to_string(n) +
                                    ", tau=" + std::to_string(tau) + ")");
    if (x_max < 1) throw std::invalid_argument("x_max must be >= 1 (got " + std::to_string(x_max) + ")");
}

int FaultPattern::faulty_count() const {
    return static_cast<int>(std::count(flags.begin(), flags.end(), true));
}

double cell_lower(int d, int precision, int x_max) {
    const double num = -static_cast<double>(x_max) * precision + 2.0 * (d - 1) * x_max;
    return num / precision;
}

double cell_upper(int d, int precision, int x_max) {
    const double num = -static_cast<double>(x_max) * precision + 2.0 * d * x_max;
    return num / precision;
}

double draw_target(const ScenarioParams& params, RandomStream& rng) {
    return rng.uniform(-params.x_max, params.x_max);
}

int cell_index(double x, int precision, int x_max) {
    if (precision < 1) throw std::domain_error("precision must be positive");
    if (!(x >= -x_max && x <= x_max))
        throw std::domain_error("target " + std::to_string(x) + " outside [-x_max, x_max]");
    int d = static_cast<int>(std::ceil((x + x_max) * precision / (2.0 * x_max)));
    d = std::clamp(d, 1, precision);
    // Snap against the exact lattice so boundary ties always go to the lower cell.
    while (d > 1 && x <= cell_lower(d, precision, x_max)) --d;
    while (d < precision && x > cell_upper(d, precision, x_max)) ++d;
    return d;
}

Interval truthful_interval(double x, int precision, int x_max) {
    const int d = cell_index(x, precision, x_max);
    return {cell_lower(d, precision, x_max), cell_upper(d, precision, x_max)};
}

Interval draw_faulty_reading(const ScenarioParams& params, RandomStream& rng, int& precision_out) {
    precision_out = static_cast<int>(rng.uniform_int(1, params.x_max));
    const double phantom = draw_target(params, rng);
    return truthful_interval(phantom, precision_out, params.x_max);
}

Interval draw_faulty_reading(const ScenarioParams& params, RandomStream& rng) {
    int unused = 0;
    return draw_faulty_reading(params, rng, unused);
}

FaultPattern draw_fault_pattern(int n, int tau, RandomStream& rng) {
    // Partial Fisher-Yates: the first tau slots of a uniform permutation.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    FaultPattern pattern{std::vector<bool>(static_cast<std::size_t>(n), false)};
    for (int k = 0; k < tau; ++k) {
        const auto pick = rng.uniform_int(k, n - 1);
        std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(pick)]);
        pattern.flags[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = true;
    }
    return pattern;
}

TrialData generate_trial(const ScenarioParams& params, RandomStream& rng) {
    const auto n = static_cast<std::size_t>(params.n);
    const auto m = static_cast<std::size_t>(params.m);

    TrialData trial;
    trial.x = draw_target(params, rng);
    trial.pattern = draw_fault_pattern(params.n, params.tau, rng);
    trial.readings = ReadingMatrix(n, m);
    trial.precisions.assign(n * m, 0);

    for (std::size_t i = 0; i < n; ++i) {
        if (!trial.pattern.faulty(i)) {
            const int precision = static_cast<int>(rng.uniform_int(1, params.x_max));
            const Interval reading = truthful_interval(trial.x, precision, params.x_max);
            for (std::size_t j = 0; j < m; ++j) {
                trial.readings.at(i, j) = reading;
                trial.precisions[j * n + i] = precision;
            }
        } else {
            for (std::size_t j = 0; j < m; ++j) {
                int precision = 0;
                trial.readings.at(i, j) = draw_faulty_reading(params, rng, precision);
                trial.precisions[j * n + i] = precision;
            }
        }
    }
    return trial;
}

TrialData generate_trial(const ScenarioParams& params, StreamDomain domain, std::uint64_t index) {
    auto rng = RandomStream::derived(params.seed, domain, index);
    return generate_trial(params, rng);
}

}  // namespace ftfusion
