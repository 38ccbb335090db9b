#pragma once

/**
 * @file rng.hpp
 * @brief Counter-based random streams for reproducible parallel sampling.
 *
 * Every draw is a pure function of a key (seed, replication, stream, index,
 * salt), so the same service-time variable can be read from any thread or
 * any point of a computation and always resolves to the same value. This is
 * what lets consecutive state matrices share one generation of service times
 * exactly, and lets replications run concurrently with disjoint substreams.
 */

#include <cstdint>

namespace tropic {

namespace detail {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

struct RngKey {
    std::uint64_t seed = 0;
    std::uint64_t replication = 0;
    std::uint64_t stream = 0;
    std::uint64_t index = 0;
};

/// 64 uniform bits for the keyed draw number `salt` (attempt counter).
inline std::uint64_t rng_bits(const RngKey& k, std::uint64_t salt) {
    std::uint64_t h = detail::mix64(k.seed);
    h = detail::mix64(h ^ (k.replication * 0xd1342543de82ef95ULL));
    h = detail::mix64(h ^ (k.stream * 0xaf251af3b0f025b5ULL));
    h = detail::mix64(h ^ (k.index * 0x9e6c63d0876a9a35ULL));
    h = detail::mix64(h ^ (salt * 0xc2b2ae3d27d4eb4fULL));
    return h;
}

/// Uniform double strictly inside (0, 1).
inline double rng_u01(const RngKey& k, std::uint64_t salt) {
    return (static_cast<double>(rng_bits(k, salt) >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace tropic
