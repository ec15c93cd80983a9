#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>

namespace rgnn {

/// splitmix64 finalizer; used to expand seeds and derive child streams.
std::uint64_t splitmix64(std::uint64_t& state);

/// Derives an independent child seed from a parent seed and a stream id.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream);

/// xoshiro256** (Blackman & Vigna). The only generator used by the library,
/// so every random draw is reproducible across platforms and compilers.
///
/// State is seeded by four successive splitmix64 outputs of the seed.
/// Distributions are implemented here rather than through <random>, whose
/// distribution algorithms are implementation-defined:
///   uniform01  = (next() >> 11) * 2^-53               in [0, 1)
///   normal     = Box-Muller on (1 - uniform01, uniform01), pairs cached
///   index(n)   = Lemire's multiply-shift with rejection, in [0, n)
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next(); }
  result_type next();

  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal(double mean = 0.0, double stddev = 1.0);
  std::uint64_t index(std::uint64_t n);

 private:
  std::array<std::uint64_t, 4> s_{};
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// Fisher-Yates shuffle driven by Xoshiro256::index.
template <typename T>
void shuffle(std::span<T> items, Xoshiro256& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.index(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace rgnn
