#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace spanlab {

/// Seeded random stream with portable draws.
///
/// std::mt19937_64 is fully specified by the standard, but the std
/// distributions are not, so bounded integers, uniforms and Poisson counts
/// are derived here from raw engine output. Identical seeds give identical
/// streams on every conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [lo, hi] by rejection sampling.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Uniform real in [0, 1) with 53 random bits.
  double uniform01();

  bool bernoulli(double p) { return uniform01() < p; }

  /// Knuth's multiplication method; fine for the small rates used here.
  int poisson(double lambda);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer, used to derive independent sub-seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace spanlab
