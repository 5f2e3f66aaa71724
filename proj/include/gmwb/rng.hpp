#pragma once

#include <cstdint>

namespace gmwb {

// splitmix64; small, fast, and good enough for Monte-Carlo uniforms.
struct SplitMix64 {
    std::uint64_t state = 0;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

/// Counter-based stream derivation: path i gets its own generator state from
/// (seed, i) alone, so results do not depend on evaluation order.
inline SplitMix64 path_stream(std::uint64_t seed, std::uint64_t path) {
    SplitMix64 mix{seed ^ (0x9E3779B97F4A7C15ULL * (path + 1))};
    SplitMix64 out{mix.next()};
    out.state ^= mix.next();
    return out;
}

} // namespace gmwb
