#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace synchro {

/// Every stochastic component takes one of these explicitly; there is no global generator.
using Rng = std::mt19937_64;

/// Uniform integer in [lo, hi]. Implemented by rejection so traces match across standard libraries.
inline int uniform_int(Rng &rng, int lo, int hi)
{
    const std::uint64_t span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo) + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t draw = rng();
    while (draw >= limit) draw = rng();
    return lo + static_cast<int>(draw % span);
}

/// Uniform double in [0, 1).
inline double uniform01(Rng &rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng &rng, double lo, double hi)
{
    return lo + (hi - lo) * uniform01(rng);
}

}  // namespace synchro
