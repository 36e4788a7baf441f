#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace padic_diffusion {

namespace detail {

/// SplitMix64 finalizer; a bijection on 64-bit words with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

/**
 * Counter-based random stream: output k is mix64(key + k * golden).
 *
 * The key is derived from (seed, stream index), so stream i of a run is fully
 * determined by the pair and independent of how streams are distributed over
 * workers. Satisfies UniformRandomBitGenerator.
 */
class StreamRng {
public:
    using result_type = std::uint64_t;

    explicit StreamRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_(detail::mix64(detail::mix64(seed ^ 0x6a09e667f3bcc908ULL) + detail::mix64(stream))) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return detail::mix64(key_ + (counter_++) * kGolden); }

    /// Independent child stream, e.g. one per path.
    StreamRng split(std::uint64_t index) const noexcept { return StreamRng(key_, index); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform integer on [0, bound), unbiased (Lemire's method).
    std::uint64_t uniform_below(std::uint64_t bound) noexcept {
        if (bound <= 1) return 0;
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
            if (static_cast<std::uint64_t>(m) >= threshold) {
                return static_cast<std::uint64_t>(m >> 64);
            }
        }
    }

    /// Exp(1) variate by inversion.
    double exponential() noexcept { return -std::log1p(-uniform01()); }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace padic_diffusion
