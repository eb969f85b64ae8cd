#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace roga {

/// Seeded 64-bit Mersenne Twister with hand-written distribution transforms.
///
/// std::mt19937_64 produces the same raw sequence on every conforming
/// standard library, but the std distributions do not, so uniform, normal,
/// index and shuffle draws are implemented here on top of the raw words.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via the Box-Muller transform. Each call consumes two
  /// raw words; no state is cached between calls.
  double normal();

  /// Uniform integer in [0, n), unbiased by rejection. n must be >= 1.
  std::uint64_t index(std::uint64_t n);

  /// Fisher-Yates shuffle driven by index().
  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Seed of the stream owned by `domain_id`.
constexpr std::uint64_t domain_stream_seed(std::uint64_t seed, int domain_id) {
  return seed ^ static_cast<std::uint64_t>(domain_id);
}

/// SplitMix64 finalizer; used to derive well-separated child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace roga
