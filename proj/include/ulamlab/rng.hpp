#pragma once

#include <cstdint>
#include <span>

namespace ulamlab {

/// Counter-based pseudo-random generator built on splitmix64 finalizers.
/// Values depend only on the key material, never on call order, so a
/// perturbed map evaluates identically no matter how its window is walked.
class CounterRng {
public:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Hashes a seed together with a coordinate tuple and a stream index.
    static std::uint64_t key(std::uint64_t seed, std::span<const std::int64_t> coords,
                             std::uint64_t stream) {
        std::uint64_t h = mix(seed ^ 0x5851f42d4c957f2dULL);
        for (std::int64_t c : coords) h = mix(h ^ static_cast<std::uint64_t>(c));
        return mix(h ^ stream);
    }

    /// Uniform double in [0, 1) from 53 bits of the hash.
    static double to_unit(std::uint64_t h) {
        return static_cast<double>(h >> 11) * 0x1.0p-53;
    }

    static double unit(std::uint64_t seed, std::span<const std::int64_t> coords,
                       std::uint64_t stream) {
        return to_unit(key(seed, coords, stream));
    }
};

/// Sequential splitmix64, for test data generation.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() { return CounterRng::mix(state_++); }
    double next_unit() { return CounterRng::to_unit(next()); }
    /// Uniform in [lo, hi).
    double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

private:
    std::uint64_t state_;
};

} // namespace ulamlab
