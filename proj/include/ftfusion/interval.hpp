#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

namespace ftfusion {

/// A closed interval reading [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    constexpr double width() const noexcept { return hi - lo; }
    constexpr double midpoint() const noexcept { return 0.5 * (lo + hi); }
    constexpr bool contains(double x) const noexcept { return lo <= x && x <= hi; }

    friend constexpr bool operator==(const Interval&, const Interval&) = default;

    friend std::ostream& operator<<(std::ostream& out, const Interval& iv) {
        return out << '[' << iv.lo << ", " << iv.hi << ']';
    }
};

/// One agent's view: the n intervals it received, indexed by sensor.
using AgentReadings = std::span<const Interval>;

/// n x m array of intervals, stored agent-major so that each agent's
/// readings are a contiguous span.
class ReadingMatrix {
public:
    ReadingMatrix() = default;
    ReadingMatrix(std::size_t sensors, std::size_t agents)
        : sensors_(sensors), agents_(agents), cells_(sensors * agents) {}

    std::size_t sensors() const noexcept { return sensors_; }
    std::size_t agents() const noexcept { return agents_; }

    Interval& at(std::size_t sensor, std::size_t agent) {
        return cells_.at(agent * sensors_ + sensor);
    }
    const Interval& at(std::size_t sensor, std::size_t agent) const {
        return cells_.at(agent * sensors_ + sensor);
    }

    AgentReadings agent(std::size_t j) const {
        if (j >= agents_) throw std::out_of_range("ReadingMatrix::agent");
        return AgentReadings(cells_.data() + j * sensors_, sensors_);
    }

    friend bool operator==(const ReadingMatrix&, const ReadingMatrix&) = default;

private:
    std::size_t sensors_ = 0;
    std::size_t agents_ = 0;
    std::vector<Interval> cells_;
};

}  // namespace ftfusion
