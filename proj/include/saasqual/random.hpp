#ifndef SAASQUAL_RANDOM_HPP
#define SAASQUAL_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace saasqual {

/**
 * Deterministic pseudo-random source shared by seeding and synthetic data.
 *
 * The bit stream is std::mt19937_64, whose output sequence is fixed by the
 * C++ standard. The standard distributions are not (their algorithms are
 * implementation-defined), so uniform and normal variates are derived here:
 * uniform() takes the top 53 bits, normal() is the Box-Muller transform
 * using the cosine branch only. Streams are therefore identical across
 * standard libraries and platforms.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer on [0, bound). bound must be positive.
    std::uint64_t index(std::uint64_t bound) {
        auto i = static_cast<std::uint64_t>(uniform() * static_cast<double>(bound));
        return i < bound ? i : bound - 1;
    }

    /// Standard normal variate.
    double normal() {
        // 1 - uniform() lies in (0, 1], so the logarithm is finite.
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace saasqual

#endif
