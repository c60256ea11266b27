#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rbsched {

using Rng = std::mt19937_64;

// Derives an independent generator for a named substream of a master seed.
// The same (seed, name) pair always yields the same sequence.
inline Rng make_substream(std::uint64_t master_seed, std::string_view name) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                      static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return Rng(seq);
}

}  // namespace rbsched
