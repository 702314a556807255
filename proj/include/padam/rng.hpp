#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace padam {

// Counter-based deterministic RNG. A root seed plus a stream index derive
// independent streams; identical (seed, index) always reproduces the same
// sequence on every platform, which is why draws are generated here instead
// of through std::uniform_real_distribution (whose output is
// implementation-defined).
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : seed_(seed), state_(seed) {
        // Warm up so that small seeds do not produce correlated openings.
        next_u64();
        next_u64();
    }

    std::uint64_t seed() const { return seed_; }

    /// Derive an independent stream from the original seed; independent of
    /// how many draws this generator has already produced.
    SeededRng stream(std::uint64_t index) const {
        return SeededRng(mix(seed_, 0x9E3779B97F4A7C15ULL * (index + 1) + 0x6A09E667F3BCC909ULL));
    }

    std::uint64_t next_u64() {
        // splitmix64 (Steele, Lea, Flood 2014). Adequate as a stream
        // generator for mask draws and Gaussian noise.
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("SeededRng::below: n must be positive");
        const std::uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    /// Standard normal via Box-Muller; pairs are cached.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t z = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

/// Chained seed derivation for (seed, a), (seed, a, b), ... provenance rules.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a) {
    std::uint64_t z = seed ^ (0x9E3779B97F4A7C15ULL * (a + 1));
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(seed, a), b);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return derive_seed(derive_seed(seed, a, b), c);
}

} // namespace padam
