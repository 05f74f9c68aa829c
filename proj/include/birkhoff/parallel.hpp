#pragma once

#include <tbb/parallel_for.h>

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace birkhoff {

/// Stable per-item seed derived from a run seed and an item index.
inline std::uint64_t item_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Uniform double in [0, 1) with 53 random bits; independent of the
/// standard library's distribution implementation.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// out[i] = fn(i) for i in [0, count). Each slot is written by exactly one
/// task, so results do not depend on the worker count.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t count, Fn&& fn) {
    std::vector<T> out(count);
    tbb::parallel_for(std::size_t{0}, count, [&](std::size_t i) { out[i] = fn(i); });
    return out;
}

}  // namespace birkhoff
