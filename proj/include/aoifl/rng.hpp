#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace aoifl {

/// Seeded random source used everywhere in the library.
///
/// The bit generator is std::mt19937_64, whose output sequence is fixed by the
/// C++ standard. The standard distributions are implementation-defined, so all
/// variates are derived here with explicit transforms:
///   uniform()      (bits >> 11) * 2^-53, in [0, 1)
///   normal()       Box-Muller cosine branch, one engine pair per variate
///   exponential()  -log1p(-u), mean 1
///   index(n)       rejection sampling on the top of the 64-bit range
/// Independent streams come from derive(seed, stream), which seeds the engine
/// with splitmix64(seed ^ splitmix64(stream + 1)).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng derive(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double normal();
  double exponential();
  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Uniformly random permutation of {0, ..., n-1}.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace aoifl
