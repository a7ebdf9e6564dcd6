#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace twohop {

// Counter-based randomness. Every random quantity in a trial is a pure
// function of (master seed, a stream tag, and the identities involved), so
// changing one parameter never shifts unrelated draws.

// Sub-stream tags. Values are part of the reproducibility contract.
enum class Stream : std::uint64_t {
    SourceProcess = 1,
    RelayProcess = 2,
    DestinationAngles = 3,
    Fading = 4,
    Thinning = 5,
    Trial = 6,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t hash_combine(std::initializer_list<std::uint64_t> parts) noexcept {
    std::uint64_t h = 0x2545f4914f6cdd1dULL;
    for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t index = 0) noexcept {
    return hash_combine({master, static_cast<std::uint64_t>(stream), index});
}

// Uniform in the open interval (0, 1) from the top 53 bits of a hash.
inline double hash_to_unit(std::uint64_t h) noexcept {
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

// Unit-mean exponential from a hash (inverse CDF).
inline double hash_to_exponential(std::uint64_t h) noexcept {
    return -std::log(hash_to_unit(h));
}

}  // namespace twohop
