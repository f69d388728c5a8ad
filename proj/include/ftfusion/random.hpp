#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace ftfusion {

/// SplitMix64 finalizer. Used to derive independent sub-stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Purpose tags for derived streams, so that e.g. fitting and evaluation
/// never share random numbers for the same trial index.
enum class StreamDomain : std::uint64_t {
    evaluation = 1,
    moments = 2,
    fitting = 3,
    oracle_check = 4,
    restarts = 5,
    test = 99,
};

constexpr std::uint64_t derive_seed(std::uint64_t root, StreamDomain domain,
                                    std::uint64_t index) noexcept {
    return mix64(mix64(root ^ mix64(static_cast<std::uint64_t>(domain))) + index);
}

/// A reproducible random stream.
///
/// The engine (mt19937_64) is fully specified by the standard; the
/// conversions below are written out by hand because the standard
/// distributions are implementation-defined, and trial data must be
/// bit-identical across toolchains.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    static RandomStream derived(std::uint64_t root, StreamDomain domain, std::uint64_t index) {
        return RandomStream(derive_seed(root, domain, index));
    }

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi].
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer on [lo, hi] (inclusive), unbiased via rejection.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1ULL;
        if (span == 0) return static_cast<std::int64_t>(engine_());
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % span;
        std::uint64_t r = engine_();
        while (r >= limit) r = engine_();
        return lo + static_cast<std::int64_t>(r % span);
    }

    /// Standard normal via Box-Muller (used by tests and restarts only).
    double normal() {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

}  // namespace ftfusion
