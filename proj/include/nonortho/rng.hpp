#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>

namespace nonortho {

/// SplitMix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// mt19937_64 seeded from splitmix64(seed ^ splitmix64(stream)). Uniform
/// draws are built from the raw 64-bit output rather than
/// std::uniform_real_distribution, whose algorithm is implementation-defined.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream = 0) : engine_(splitmix64(seed ^ splitmix64(stream))) {}

    std::uint64_t next_u64() { return engine_(); }

    /// [0, 1)
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// (low, high]
    double uniform_left_open(double low, double high) { return low + (high - low) * (1.0 - uniform()); }

    double uniform(double low, double high) { return low + (high - low) * uniform(); }

    /// Standard normal by Box-Muller on the raw draws.
    double normal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

private:
    std::mt19937_64 engine_;
};

}  // namespace nonortho
