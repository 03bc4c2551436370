#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace msdet {

/// Deterministic 64-bit generator (splitmix64). Used everywhere randomness
/// is needed so that a seed fully determines the output on any platform.
/// Substreams are derived by mixing a stream id into the seed, which keeps
/// per-image generation independent of processing order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
        Rng r(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
        return r.next_u64();
    }

    Rng substream(std::uint64_t stream) const { return Rng(mix(state_, stream)); }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
        return lo + below(hi - lo + 1);
    }

    /// Box-Muller without state: two uniforms per draw.
    double normal(double mean, double sigma) {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        return mean + sigma * std::sqrt(-2.0 * std::log(u1)) *
                          std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Knuth's product method; fine for the small means used here.
    int poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        const double limit = std::exp(-lambda);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

private:
    std::uint64_t state_;
};

} // namespace msdet
