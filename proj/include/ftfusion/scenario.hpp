#pragma once

// Generative model for the uniform-precision faulty-sensor scenario.
//
// The target X is uniform on [-x_max, x_max]. Each sensor draws a precision
// d uniform on {1..x_max}, splits [-x_max, x_max] into d equal cells and
// reports the cell that contains X. A random subset of tau sensors is faulty:
// a faulty sensor sends each agent an independent reading that has the same
// marginal law as a truthful one but is independent of X.

#include <cstdint>
#include <vector>

#include "ftfusion/interval.hpp"
#include "ftfusion/random.hpp"

namespace ftfusion {

struct ScenarioParams {
    int n = 10;       // sensors
    int m = 2;        // agents
    int tau = 0;      // faulty sensors
    int x_max = 5;    // target half-range
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// true = faulty. Exactly tau entries are set.
struct FaultPattern {
    std::vector<bool> flags;

    int faulty_count() const;
    bool faulty(std::size_t i) const { return flags.at(i); }
};

struct TrialData {
    double x = 0.0;
    ReadingMatrix readings;
    FaultPattern pattern;
    /// Precision of each reading, same shape as `readings` (sensor, agent).
    /// Truthful sensors repeat one precision across agents; faulty sensors
    /// draw a fresh precision per agent.
    std::vector<int> precisions;

    int precision(std::size_t sensor, std::size_t agent) const {
        return precisions.at(agent * readings.sensors() + sensor);
    }
};

/// Lower endpoint of cell `d` (1-based) when [-x_max, x_max] is split into
/// `precision` cells. Computed as a single rounded division so that every
/// caller lands on bit-identical lattice points.
double cell_lower(int d, int precision, int x_max);
double cell_upper(int d, int precision, int x_max);

double draw_target(const ScenarioParams& params, RandomStream& rng);

/// The cell containing x. Interior boundaries belong to the lower cell;
/// x = -x_max belongs to the first cell. Throws std::domain_error when
/// x is outside [-x_max, x_max] or precision is not positive.
Interval truthful_interval(double x, int precision, int x_max);

/// Index (1-based) of the cell truthful_interval would return.
int cell_index(double x, int precision, int x_max);

Interval draw_faulty_reading(const ScenarioParams& params, RandomStream& rng);

/// Same as draw_faulty_reading but also reports the precision drawn.
Interval draw_faulty_reading(const ScenarioParams& params, RandomStream& rng, int& precision_out);

/// Uniform over all C(n, tau) patterns.
FaultPattern draw_fault_pattern(int n, int tau, RandomStream& rng);

TrialData generate_trial(const ScenarioParams& params, RandomStream& rng);

/// Trial `index` drawn from its own derived stream, so trials can be
/// produced in any order or in parallel.
TrialData generate_trial(const ScenarioParams& params, StreamDomain domain, std::uint64_t index);

}  // namespace ftfusion
