#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ksca {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; turns (base seed, stream id) into an independent seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// `count` distinct indices drawn uniformly from [0, population).
inline std::vector<int> sample_distinct(Rng& rng, int population, int count) {
  std::vector<int> out;
  out.reserve(count);
  // Floyd's algorithm; count is tiny (<= m) so the linear membership scan is fine.
  for (int j = population - count; j < population; ++j) {
    std::uniform_int_distribution<int> pick(0, j);
    const int t = pick(rng);
    bool seen = false;
    for (int v : out)
      if (v == t) { seen = true; break; }
    out.push_back(seen ? j : t);
  }
  return out;
}

} // namespace ksca
