#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace deckeval {

/// SplitMix64 finalizer; used to derive independent sub-seeds.
std::uint64_t mix64(std::uint64_t x);

/// Sub-seed for one (item, degree) cell of a dataset expansion. Depends only
/// on its arguments, so item order and parallelism cannot change outputs.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t item_index, std::uint64_t degree);

/// Seeded generator with platform-independent sampling helpers. The standard
/// distributions are implementation-defined, so they are not used here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next() { return engine_(); }
  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);
  /// Uniform integer in [lo, hi].
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
  /// k distinct values from [0, n), in draw order.
  std::vector<int> sample(int n, int k);
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace deckeval
