#pragma once

#include <cstdint>
#include <random>

namespace slicemap {

/// Seeded generator with draws that do not depend on the standard library's
/// distribution implementations, so a seed means the same stream everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_index(std::uint64_t n)
    {
        // Rejection keeps the draw unbiased.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi)
    {
        return lo + static_cast<std::int64_t>(uniform_index(static_cast<std::uint64_t>(hi - lo) + 1));
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace slicemap
