#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>

namespace ufrkit {

/// SplitMix64. Small, fast, and with a fully specified output sequence, so seeded
/// results do not depend on the standard library's distribution implementations.
class SplitMix64 {
  public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on (0, 1).
    double uniform() noexcept { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    /// Uniform integer in [0, n) by multiply-shift; n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t x = (*this)();
        const std::uint64_t xl = x & 0xFFFFFFFFULL, xh = x >> 32;
        const std::uint64_t nl = n & 0xFFFFFFFFULL, nh = n >> 32;
        const std::uint64_t ll = xl * nl, lh = xl * nh, hl = xh * nl, hh = xh * nh;
        const std::uint64_t mid = (ll >> 32) + (lh & 0xFFFFFFFFULL) + (hl & 0xFFFFFFFFULL);
        return hh + (lh >> 32) + (hl >> 32) + (mid >> 32);
    }

    /// Standard normal (Box-Muller, cosine branch).
    double normal() noexcept {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    std::uint64_t state_;
};

/// Seed for a named sub-stream: hash of (root, name, index). Identical inputs give
/// identical seeds on every platform and under any thread schedule.
[[nodiscard]] inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the stream name
    for (unsigned char c : stream) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    SplitMix64 mix(root ^ h);
    const std::uint64_t a = mix();
    SplitMix64 mix2(a ^ (index * 0xD1B54A32D192ED03ULL));
    return mix2();
}

/// Fisher-Yates shuffle driven by SplitMix64.
template <class It>
void seeded_shuffle(It first, It last, SplitMix64& rng) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
        const auto j = rng.below(i);
        std::swap(first[static_cast<std::ptrdiff_t>(i - 1)], first[static_cast<std::ptrdiff_t>(j)]);
    }
}

}  // namespace ufrkit
