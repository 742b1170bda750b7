#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace riskcal {

/// xoshiro256** generator seeded through splitmix64.
///
/// Every consumer derives its own stream with `Rng::stream(seed, tag...)`
/// so that adding a consumer never shifts the draws of another one. All
/// helpers below (uniform ints, shuffles) are implemented here rather than
/// through <random> distributions, whose output is implementation-defined.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  /// Independent stream for a (seed, component) pair.
  static Rng stream(std::uint64_t seed, std::string_view component);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound);
  double normal();

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::array<std::uint64_t, 4> state_{};
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// FNV-1a over bytes, used to fold identifiers into seeds.
std::uint64_t hash_bytes(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// Mixes a sequence of identifiers into a 64-bit seed.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::string_view> parts);

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace riskcal
