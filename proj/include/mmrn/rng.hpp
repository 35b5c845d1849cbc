#pragma once

// Counter-based splittable random streams. A replicate's stream is derived
// from (master seed, replicate index) alone, so results are independent of
// replicate scheduling and bit-reproducible for a fixed build. All
// distributions are implemented on top of a single uniform primitive to
// avoid dependence on unspecified standard-library distribution algorithms.

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace mmrn {

namespace detail {
/// SplitMix64 finalizer: the standard 64-bit avalanche mix.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// xoshiro256++ generator seeded through SplitMix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = detail::splitmix64(sm);
    hasSpare_ = false;
  }

  /// Counter-derived seed for stream `index` of a master seed.
  [[nodiscard]] static std::uint64_t derive_seed(std::uint64_t seed,
                                                 std::uint64_t index) {
    std::uint64_t sm = seed;
    const std::uint64_t a = detail::splitmix64(sm);
    sm = a ^ (index + 0x9E3779B97F4A7C15ULL);
    return detail::splitmix64(sm);
  }

  /// Independent stream for a (seed, index) pair; used to give each
  /// benchmark replicate its own generator regardless of run order.
  [[nodiscard]] static Rng substream(std::uint64_t seed, std::uint64_t index) {
    return Rng(derive_seed(seed, index));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller with a cached spare.
  double normal() {
    if (hasSpare_) {
      hasSpare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // in (0, 1], keeps log finite
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    hasSpare_ = true;
    return radius * std::cos(angle);
  }

  /// Poisson via Knuth's product-of-uniforms method (small means only).
  int poisson(double lambda) {
    if (!(lambda > 0.0) || lambda > 30.0) {
      throw std::invalid_argument("Rng::poisson: lambda out of range");
    }
    const double limit = std::exp(-lambda);
    int k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }

  /// Binomial as a sum of Bernoulli draws.
  int binomial(int trials, double prob) {
    if (trials < 0 || prob < 0.0 || prob > 1.0) {
      throw std::invalid_argument("Rng::binomial: bad parameters");
    }
    int count = 0;
    for (int i = 0; i < trials; ++i) {
      if (uniform() < prob) ++count;
    }
    return count;
  }

  /// Beta(a, 1) by inverse CDF: F(x) = x^a on [0, 1].
  double beta_a1(double a) {
    if (!(a > 0.0)) {
      throw std::invalid_argument("Rng::beta_a1: a must be positive");
    }
    return std::pow(uniform(), 1.0 / a);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool hasSpare_ = false;
};

}  // namespace mmrn
