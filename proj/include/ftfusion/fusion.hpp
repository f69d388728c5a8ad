#pragma once

// Per-agent fusion functions. Every function here looks at a single agent's
// list of n intervals and returns that agent's estimate of the target.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ftfusion/interval.hpp"

namespace ftfusion {

/// Raised when a fuser receives input on which its formula is undefined
/// (e.g. all GBI weights vanish). Callers may catch it and fall back.
class DegenerateInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class MarzulloVariant {
    /// (L_(tau+1) + U_(n-tau-1)) / 2 with ascending order statistics.
    literal,
    /// Midpoint of the hull of all points covered by at least n - tau intervals.
    classical,
};

double fuse_marzullo(AgentReadings readings, int tau,
                     MarzulloVariant variant = MarzulloVariant::literal);

/// Coverage count g(x) = #{i : x in [lo_i, hi_i]} as a step function.
struct TransitionProfile {
    std::vector<double> points;  // distinct endpoints, ascending
    std::vector<int> counts;     // counts[k]: coverage of the open region (points[k], points[k+1])

    std::size_t regions() const noexcept { return counts.size(); }
    double region_midpoint(std::size_t k) const { return 0.5 * (points.at(k) + points.at(k + 1)); }
};

TransitionProfile transition_profile(AgentReadings readings);

struct BiResult {
    double value = 0.0;
    /// No region reached n - tau coverage; value is the count-weighted mean
    /// over the regions of maximal coverage instead.
    bool fallback = false;
};

BiResult fuse_bi_checked(AgentReadings readings, int tau);

inline double fuse_bi(AgentReadings readings, int tau) { return fuse_bi_checked(readings, tau).value; }

/// One candidate set of truthful sensors (size n - tau).
struct GbiTerm {
    std::uint64_t truthful_mask = 0;  // bit i set = sensor i assumed truthful
    double weight = 0.0;
    double midpoint = 0.0;            // intersection midpoint; 0 when the intersection is empty
};

struct GbiWeights {
    std::vector<GbiTerm> terms;

    double total_weight() const;
};

/// Weights that make the GBI estimate equal to the posterior mean under the
/// uniform-precision model: |min hi - max lo|^+ * prod 1/(hi - lo) over the
/// assumed-truthful subset. Throws std::invalid_argument on a zero-width
/// interval or n > 63.
GbiWeights gbi_weights_oneopt(AgentReadings readings, int tau);

/// Weighted mean of term midpoints. Throws DegenerateInputError when the
/// total weight is not positive.
double fuse_gbi(AgentReadings readings, const GbiWeights& weights);

/// Linear fuser sum_i eps[i] * lo_i + del[i] * hi_i + gamma.
struct LinearCoefficients {
    std::vector<double> eps;
    std::vector<double> del;
    double gamma = 0.0;

    /// Same eps and del for all n sensors.
    static LinearCoefficients uniform(std::size_t n, double eps, double del, double gamma);
};

double fuse_linear(AgentReadings readings, const LinearCoefficients& coeffs);

/// Visits every size-k subset of {0..n-1} as a bitmask, in lexicographic
/// order of the sorted member indices.
template <class Visitor>
void for_each_subset(int n, int k, Visitor&& visit) {
    if (k < 0 || k > n) return;
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
        std::uint64_t mask = 0;
        for (int i : idx) mask |= (std::uint64_t{1} << i);
        visit(mask);
        int pos = k - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
        if (pos < 0) return;
        ++idx[static_cast<std::size_t>(pos)];
        for (int i = pos + 1; i < k; ++i)
            idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
    }
}

}  // namespace ftfusion
