#pragma once

#include <cstdint>

namespace memlstm {

// splitmix64 step; good avalanche, used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic seed for a substream identified by `stream` (trial index,
// component id, ...). Independent runs derive disjoint generator states from
// one global seed.
inline std::uint64_t mix_seed(std::uint64_t global_seed, std::uint64_t stream) {
    return splitmix64(global_seed ^ splitmix64(stream));
}

} // namespace memlstm
