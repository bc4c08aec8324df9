#pragma once

#include <cmath>
#include <cstdint>

namespace fairgauge {

// Deterministic 64-bit generator (splitmix64). Hand-rolled rather than
// <random> because the standard distributions are implementation-defined
// and replicate membership must be byte-identical across platforms.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, bound), bound > 0. Lemire's multiply-shift
    // with rejection; unbiased and platform-independent.
    std::uint64_t bounded(std::uint64_t bound) {
        unsigned __int128 m = (unsigned __int128)next() * bound;
        std::uint64_t lo = (std::uint64_t)m;
        if (lo < bound) {
            std::uint64_t threshold = (0 - bound) % bound;
            while (lo < threshold) {
                m = (unsigned __int128)next() * bound;
                lo = (std::uint64_t)m;
            }
        }
        return (std::uint64_t)(m >> 64);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() { return (double)(next() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; caches the second deviate.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = ((double)(next() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace detail

// Pure function of (master_seed, size, index); the basis of replicate
// independence from execution order.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t size, std::uint64_t index) {
    std::uint64_t h = detail::mix64(master_seed);
    h = detail::mix64(h ^ detail::mix64(size));
    h = detail::mix64(h ^ detail::mix64(index));
    return h;
}

// Decorrelated stream off a base seed (sampling vs. splitting, etc.).
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
    return detail::mix64(seed ^ detail::mix64(stream ^ 0xA3C59AC2F1EED5B7ULL));
}

}  // namespace fairgauge
