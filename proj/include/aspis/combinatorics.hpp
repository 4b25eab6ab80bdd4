#pragma once

// Binomial coefficients and the colexicographic combinatorial number system
// used to map worker subsets onto file indices.

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace aspis {

/// Worker label, 1-based (U_1 ... U_K) everywhere in the public API.
using Worker = int;
/// Sorted list of distinct worker labels.
using WorkerSet = std::vector<Worker>;
/// File index in [0, f).
using FileId = std::uint64_t;

namespace detail {
__extension__ using uint128 = unsigned __int128;
}  // namespace detail

/// C(n, k) with C(n, k) = 0 for k < 0 or k > n. Throws std::overflow_error
/// if the result does not fit in 64 bits.
inline std::uint64_t binomial(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  detail::uint128 acc = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    // acc * (n - k + i) / i stays exact: acc is C(n - k + i - 1, i - 1).
    acc = acc * static_cast<detail::uint128>(n - k + i) / static_cast<detail::uint128>(i);
    if (acc > std::numeric_limits<std::uint64_t>::max())
      throw std::overflow_error("binomial(" + std::to_string(n) + ", " + std::to_string(k) +
                                ") exceeds 64 bits");
  }
  return static_cast<std::uint64_t>(acc);
}

namespace detail {

inline void check_subset(std::span<const Worker> subset, int K, int r) {
  if (K <= 0 || r <= 0 || r > K)
    throw std::invalid_argument("subset: need 0 < r <= K");
  if (subset.size() != static_cast<std::size_t>(r))
    throw std::invalid_argument("subset: expected " + std::to_string(r) + " members, got " +
                                std::to_string(subset.size()));
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (subset[i] < 1 || subset[i] > K)
      throw std::invalid_argument("subset: worker " + std::to_string(subset[i]) +
                                  " outside [1, " + std::to_string(K) + "]");
    if (i > 0 && subset[i] <= subset[i - 1])
      throw std::invalid_argument("subset: members must be strictly increasing");
  }
}

}  // namespace detail

/// Colexicographic rank of a strictly increasing r-subset of {1..K}.
/// rank({s_1 < ... < s_r}) = sum_i C(s_i - 1, i).
inline FileId subset_rank(std::span<const Worker> subset, int K, int r) {
  detail::check_subset(subset, K, r);
  FileId rank = 0;
  for (int i = 0; i < r; ++i) rank += binomial(subset[i] - 1, i + 1);
  return rank;
}

/// Inverse of subset_rank.
inline WorkerSet subset_unrank(FileId id, int K, int r) {
  if (K <= 0 || r <= 0 || r > K) throw std::invalid_argument("subset_unrank: need 0 < r <= K");
  if (id >= binomial(K, r))
    throw std::invalid_argument("subset_unrank: id " + std::to_string(id) + " outside [0, C(" +
                                std::to_string(K) + "," + std::to_string(r) + "))");
  WorkerSet out(static_cast<std::size_t>(r));
  std::int64_t c = K - 1;
  for (int i = r; i >= 1; --i) {
    while (binomial(c, i) > id) --c;
    id -= binomial(c, i);
    out[static_cast<std::size_t>(i - 1)] = static_cast<Worker>(c + 1);
    --c;
  }
  return out;
}

/// Calls fn(subset) for each r-subset of {lo..hi} (1-based, inclusive) in
/// lexicographic order.
template <class Fn>
void for_each_subset(int lo, int hi, int r, Fn&& fn) {
  const int n = hi - lo + 1;
  if (r < 0 || r > n) return;
  WorkerSet cur(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) cur[static_cast<std::size_t>(i)] = lo + i;
  while (true) {
    fn(static_cast<const WorkerSet&>(cur));
    int i = r - 1;
    while (i >= 0 && cur[static_cast<std::size_t>(i)] == hi - (r - 1 - i)) --i;
    if (i < 0) return;
    ++cur[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < r; ++j)
      cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace aspis
