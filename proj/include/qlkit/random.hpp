#pragma once

#include <cstdint>

namespace qlkit {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based stream: the value depends only on (key, a, b), so
/// draws are reproducible under any evaluation order.
constexpr std::uint64_t counter_hash(std::uint64_t key, std::uint64_t a,
                                     std::uint64_t b) noexcept
{
    return mix64(key ^ mix64(a ^ mix64(b + 0x632be59bd9b4e019ULL)));
}

/// Uniform double in [0, 1) with 53 random bits.
constexpr double counter_uniform(std::uint64_t key, std::uint64_t a,
                                 std::uint64_t b) noexcept
{
    return static_cast<double>(counter_hash(key, a, b) >> 11) * 0x1.0p-53;
}

/// Seed of ensemble member `index` derived from the master seed.
constexpr std::uint64_t member_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    return mix64(master ^ mix64(index + 0x2545f4914f6cdd1dULL));
}

} // namespace qlkit
