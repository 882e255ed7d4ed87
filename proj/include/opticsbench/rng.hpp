#pragma once

// Counter-based random streams. A stream is a pure function of (key, counter),
// so per-sample draws do not depend on scheduling or on how many values other
// samples consumed.

#include <cstdint>
#include <limits>

namespace opticsbench {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derive a stream key from a seed and an arbitrary number of identifiers.
constexpr std::uint64_t stream_key(std::uint64_t seed) noexcept { return mix64(seed); }

template <typename... Ids>
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t id, Ids... rest) noexcept {
    return stream_key(mix64(seed ^ mix64(id + 0x632be59bd9b4e019ULL)), rest...);
}

// UniformRandomBitGenerator over a counter-based stream; usable with <random> distributions.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit constexpr CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
        : key_(key), counter_(counter) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept { return mix64(key_ ^ mix64(counter_++)); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace opticsbench
