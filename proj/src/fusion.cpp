#include "ftfusion/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>
#include <utility>

namespace ftfusion {

namespace {

void require_nonempty(AgentReadings readings, const char* who) {
    if (readings.empty()) throw std::invalid_argument(std::string(who) + ": no readings");
}

// Hull of the regions whose coverage is at least `threshold`; returns false
// when no region qualifies.
bool covered_hull(const TransitionProfile& profile, int threshold, double& left, double& right) {
    bool found = false;
    for (std::size_t k = 0; k < profile.regions(); ++k) {
        if (profile.counts[k] < threshold) continue;
        if (!found) left = profile.points[k];
        right = profile.points[k + 1];
        found = true;
    }
    return found;
}

}  // namespace

double fuse_marzullo(AgentReadings readings, int tau, MarzulloVariant variant) {
    require_nonempty(readings, "fuse_marzullo");
    const int n = static_cast<int>(readings.size());
    if (tau < 0 || n < tau + 2)
        throw std::invalid_argument("fuse_marzullo requires n >= tau + 2 (n=" + std::to_string(n) +
                                    ", tau=" + std::to_string(tau) + ")");

    if (variant == MarzulloVariant::classical) {
        const auto profile = transition_profile(readings);
        double left = 0.0, right = 0.0;
        if (!covered_hull(profile, n - tau, left, right)) {
            const int best = profile.counts.empty()
                                 ? 0
                                 : *std::max_element(profile.counts.begin(), profile.counts.end());
            if (!covered_hull(profile, std::max(best, 1), left, right))
                throw DegenerateInputError("fuse_marzullo: no interval has positive width");
        }
        return 0.5 * (left + right);
    }

    std::vector<double> lows, highs;
    lows.reserve(readings.size());
    highs.reserve(readings.size());
    for (const auto& iv : readings) {
        lows.push_back(iv.lo);
        highs.push_back(iv.hi);
    }
    std::stable_sort(lows.begin(), lows.end());
    std::stable_sort(highs.begin(), highs.end());
    // 1-based L_(tau+1) and U_(n-tau-1).
    return 0.5 * (lows[static_cast<std::size_t>(tau)] + highs[static_cast<std::size_t>(n - tau - 2)]);
}

TransitionProfile transition_profile(AgentReadings readings) {
    TransitionProfile profile;
    // Every distinct endpoint is a point where g changes value: at a lower
    // endpoint g exceeds its left limit, at an upper endpoint its right limit.
    for (const auto& iv : readings) {
        profile.points.push_back(iv.lo);
        profile.points.push_back(iv.hi);
    }
    std::sort(profile.points.begin(), profile.points.end());
    profile.points.erase(std::unique(profile.points.begin(), profile.points.end()), profile.points.end());

    if (profile.points.size() < 2) return profile;
    profile.counts.assign(profile.points.size() - 1, 0);
    for (const auto& iv : readings) {
        if (!(iv.hi > iv.lo)) continue;  // zero width: covers no open region
        const auto first = std::lower_bound(profile.points.begin(), profile.points.end(), iv.lo);
        const auto last = std::lower_bound(profile.points.begin(), profile.points.end(), iv.hi);
        for (auto it = first; it != last; ++it)
            ++profile.counts[static_cast<std::size_t>(it - profile.points.begin())];
    }
    return profile;
}

BiResult fuse_bi_checked(AgentReadings readings, int tau) {
    require_nonempty(readings, "fuse_bi");
    const int n = static_cast<int>(readings.size());
    const auto profile = transition_profile(readings);

    auto weighted_mean = [&](int threshold, bool exact) {
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < profile.regions(); ++k) {
            const int c = profile.counts[k];
            if (exact ? c != threshold : c < threshold) continue;
            num += profile.region_midpoint(k) * c;
            den += c;
        }
        return std::pair{num, den};
    };

    auto [num, den] = weighted_mean(n - tau, false);
    if (den > 0.0) return {num / den, false};

    const int best = profile.counts.empty()
                         ? 0
                         : *std::max_element(profile.counts.begin(), profile.counts.end());
    if (best > 0) {
        std::tie(num, den) = weighted_mean(best, true);
        return {num / den, true};
    }

    // Only zero-width readings: no open region at all.
    double sum = 0.0;
    for (const auto& iv : readings) sum += iv.midpoint();
    return {sum / static_cast<double>(n), true};
}

double GbiWeights::total_weight() const {
    double total = 0.0;
    for (const auto& t : terms) total += t.weight;
    return total;
}

GbiWeights gbi_weights_oneopt(AgentReadings readings, int tau) {
    require_nonempty(readings, "gbi_weights_oneopt");
    const int n = static_cast<int>(readings.size());
    if (n > 63) throw std::invalid_argument("gbi_weights_oneopt supports at most 63 sensors");
    if (tau < 0 || tau >= n)
        throw std::invalid_argument("gbi_weights_oneopt requires 0 <= tau < n (tau=" + std::to_string(tau) + ")");
    for (const auto& iv : readings) {
        if (!(iv.hi > iv.lo))
            throw std::invalid_argument("gbi_weights_oneopt: zero-width interval");
    }

    GbiWeights out;
    for_each_subset(n, n - tau, [&](std::uint64_t mask) {
        double min_hi = std::numeric_limits<double>::infinity();
        double max_lo = -std::numeric_limits<double>::infinity();
        double inv_width = 1.0;
        for (int i = 0; i < n; ++i) {
            if (!(mask >> i & 1U)) continue;
            const auto& iv = readings[static_cast<std::size_t>(i)];
            min_hi = std::min(min_hi, iv.hi);
            max_lo = std::max(max_lo, iv.lo);
            inv_width /= iv.width();
        }
        GbiTerm term{mask, 0.0, 0.0};
        const double overlap = min_hi - max_lo;
        if (overlap > 0.0) {
            term.weight = overlap * inv_width;
            term.midpoint = 0.5 * (min_hi + max_lo);
        }
        out.terms.push_back(term);
    });
    return out;
}

double fuse_gbi(AgentReadings /*readings*/, const GbiWeights& weights) {
    double num = 0.0, den = 0.0;
    for (const auto& t : weights.terms) {
        if (t.weight == 0.0) continue;
        num += t.weight * t.midpoint;
        den += t.weight;
    }
    if (!(den > 0.0)) throw DegenerateInputError("fuse_gbi: all pattern weights are zero");
    return num / den;
}

LinearCoefficients LinearCoefficients::uniform(std::size_t n, double eps, double del, double gamma) {
    return {std::vector<double>(n, eps), std::vector<double>(n, del), gamma};
}

double fuse_linear(AgentReadings readings, const LinearCoefficients& coeffs) {
    if (coeffs.eps.size() != readings.size() || coeffs.del.size() != readings.size())
        throw std::invalid_argument("fuse_linear: coefficient count does not match reading count");
    double acc = coeffs.gamma;
    for (std::size_t i = 0; i < readings.size(); ++i)
        acc += coeffs.eps[i] * readings[i].lo + coeffs.del[i] * readings[i].hi;
    return acc;
}

}  // namespace ftfusion
