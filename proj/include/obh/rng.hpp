#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace obh {

// Seeded random source shared by every stochastic component. The mapping from
// engine output to doubles is spelled out here instead of relying on
// std::uniform_real_distribution / std::normal_distribution, whose output
// sequences are implementation-defined; this keeps runs reproducible across
// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1): top 53 bits of the engine output.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Uniform index in [0, n). n must be positive.
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    }

    // Standard normal via Box-Muller; consumes exactly two uniforms per draw.
    double gaussian() {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 == 0.0) {
            u1 = uniform01();
        }
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

// splitmix64 step; used to derive independent sub-seeds from a run seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace obh
