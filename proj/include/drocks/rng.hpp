#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace drocks {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used as the fixed hash for
/// deriving every seed in the library.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Folds a list of words into one seed: h = splitmix64(h ^ splitmix64(word + i))
/// starting from h = 0x6a09e667f3bcc909. Stable across platforms.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> words) noexcept;

/// Portable random stream. The engine is std::mt19937_64, whose output
/// sequence is fixed by the C++ standard. Distributions are implemented here
/// rather than taken from <random> because the standard leaves theirs
/// implementation-defined.
class rng {
 public:
  explicit rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of precision.
  double uniform01();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer on [0, n) by rejection; n must be > 0.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via the Box-Muller transform; consumes two uniforms per
  /// call (the second variate is discarded so the draw count stays fixed).
  double normal();

  bool bernoulli_half() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

/// Fisher-Yates shuffle driven by rng::below.
template <typename It>
void shuffle(It first, It last, rng& gen) {
  auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    auto j = gen.below(i);
    std::iter_swap(first + (i - 1), first + j);
  }
}

}  // namespace drocks
