#pragma once

#include <cstdint>
#include <random>

namespace cfrec {

using Rng = std::mt19937_64;

// splitmix64; used to derive independent seeds for named sub-streams
// (per-trial, per-repeat, per-row noise) from one experiment seed.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t base, std::uint64_t stream) {
    return Rng(mix_seed(base, stream));
}

}  // namespace cfrec
