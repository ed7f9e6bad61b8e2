#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "ksca/errors.hpp"

namespace ksca {

/// n choose k, throwing DomainError on uint64 overflow.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t factor = n - k + i;
    // result * factor / i is exact at every step because result = C(n-k+i-1, i-1).
    if (result > std::numeric_limits<std::uint64_t>::max() / factor)
      throw DomainError("binomial: overflow");
    result = result * factor / i;
  }
  return result;
}

/// Advances `combo` (strictly increasing indices in [0, n)) to the next
/// k-combination in lexicographic order. Returns false after the last one.
inline bool next_combination(std::vector<int>& combo, int n) {
  const int k = static_cast<int>(combo.size());
  int i = k - 1;
  while (i >= 0 && combo[i] == n - k + i) --i;
  if (i < 0) return false;
  ++combo[i];
  for (int j = i + 1; j < k; ++j) combo[j] = combo[j - 1] + 1;
  return true;
}

/// All k-subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<int>> k_subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n) return out;
  std::vector<int> combo(k);
  for (int i = 0; i < k; ++i) combo[i] = i;
  do {
    out.push_back(combo);
  } while (next_combination(combo, n));
  return out;
}

} // namespace ksca
