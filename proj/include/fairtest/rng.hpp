#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

// Counter-based random streams. A value depends only on (seed, stream, index),
// never on how many values were drawn before it, so results do not change with
// scheduling or thread count.

namespace fairtest::rng {

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) noexcept {
    return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) noexcept {
    return mix(mix(a, b), c);
}

/// Uniform in the open interval (0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Small sequential generator seeded from a counter key. Used when one logical
/// unit (a draw, a sample) needs several variates.
class Stream {
public:
    constexpr explicit Stream(std::uint64_t key) noexcept : state_(key) {}

    constexpr std::uint64_t next_u64() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    constexpr double uniform() noexcept { return to_unit(next_u64()); }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Box-Muller; both variates of a pair are consumed so the stream position
    // stays independent of caching.
    double normal() noexcept {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

private:
    std::uint64_t state_;
};

inline std::uint64_t double_bits(double v) noexcept {
    std::uint64_t out = 0;
    static_assert(sizeof(out) == sizeof(v));
    __builtin_memcpy(&out, &v, sizeof(v));
    return out;
}

} // namespace fairtest::rng
