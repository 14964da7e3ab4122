#include "deckeval/rng.hpp"

#include <limits>
#include <numeric>

#include "deckeval/errors.hpp"

namespace deckeval {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t item_index, std::uint64_t degree) {
  return mix64(mix64(mix64(seed) ^ item_index) ^ (degree * 0xd6e8feb86659fd93ULL));
}

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw ContractError("Rng::below requires n > 0");
  const std::uint64_t bound = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

std::vector<int> Rng::sample(int n, int k) {
  if (k < 0 || k > n) throw ContractError("Rng::sample requires 0 <= k <= n");
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    auto j = static_cast<std::size_t>(i) + below(static_cast<std::size_t>(n - i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

}  // namespace deckeval
