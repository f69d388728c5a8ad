#pragma once

// Exact posterior mean E[X | one agent's readings] for the uniform-precision
// model. Built from the joint law directly: sum over every fault pattern of
// (faulty marginals) x (truthful conditionals), integrated piece by piece.
// It shares no code with the GBI weights, which is what makes it useful as
// a check on them.

#include <stdexcept>
#include <vector>

#include "ftfusion/interval.hpp"
#include "ftfusion/scenario.hpp"

namespace ftfusion {

class InconsistentReadingsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unnormalized density, constant on each open piece
/// (breakpoints[k], breakpoints[k+1]).
struct PiecewiseDensity {
    std::vector<double> breakpoints;
    std::vector<double> levels;

    double mass() const;
    double first_moment() const;
    double mean() const { return first_moment() / mass(); }
    /// Density value at x (0 outside the breakpoints, and on breakpoints).
    double at(double x) const;
};

/// Precision implied by a reading, or throws std::domain_error if the
/// interval is not a cell of the [-x_max, x_max] lattice.
int lattice_precision(const Interval& reading, int x_max);

PiecewiseDensity posterior_density(AgentReadings readings, const ScenarioParams& params);

/// Throws std::domain_error for off-lattice readings and
/// InconsistentReadingsError if no fault pattern explains the readings.
double posterior_mean_exact(AgentReadings readings, const ScenarioParams& params);

}  // namespace ftfusion
