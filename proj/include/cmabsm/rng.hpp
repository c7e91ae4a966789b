#pragma once

#include <cstdint>
#include <random>

namespace cmabsm {

// One repetition owns one stream; never share across threads.
using Rng = std::mt19937_64;

// 64-bit avalanche (the splitmix64 finalizer) applied to master + golden-ratio
// stride * (index + 1). Used to derive independent per-repetition seeds so that
// results do not depend on execution order.
constexpr std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) noexcept {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Uniform double in [0, 1) built from the top 53 bits; bit-identical across
// standard libraries, unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace cmabsm
