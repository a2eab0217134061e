#pragma once

#include <cstdint>
#include <cmath>

#include "cpscan/dist.hpp"

namespace cpscan {

namespace detail {

inline constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ull;

// SplitMix64 finaliser (Steele, Lea, Flood 2014).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace detail

/// Seed for replicate `index` of a run keyed by `master`. Counter-based, so
/// replicates can be generated on any worker in any order and still match a
/// sequential run bit for bit.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    return detail::mix64(master + detail::golden_gamma * (index + 1));
}

// xoshiro256++ (Blackman & Vigna). State seeded through SplitMix64.
class rng {
public:
    explicit rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            sm += detail::golden_gamma;
            word = detail::mix64(sm);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0,1); 53-bit resolution, never 0 or 1.
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via the inverse CDF; one uniform per draw keeps the
    /// stream layout independent of the draw values.
    double normal() { return normal_quantile(uniform01()); }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Poisson draw. Knuth's product method for small means, halving for
    /// larger ones so the rejection count stays bounded.
    long poisson(double mean) {
        long total = 0;
        while (mean > 30.0) {
            const double half = mean * 0.5;
            total += poisson_small(half);
            mean -= half;
        }
        return total + poisson_small(mean);
    }

    /// Student-t with integer df >= 1, unit scale.
    double student_t(int df) {
        const double z = normal();
        double chi2 = 0.0;
        for (int i = 0; i < df; ++i) {
            const double g = normal();
            chi2 += g * g;
        }
        return z / std::sqrt(chi2 / df);
    }

private:
    long poisson_small(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        long k = 0;
        double prod = uniform01();
        while (prod > limit) {
            ++k;
            prod *= uniform01();
        }
        return k;
    }

    std::uint64_t state_[4];
};

} // namespace cpscan
