#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "malcast/error.hpp"

namespace malcast {

inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed for a named sub-stream: FNV-1a of the label mixed with the parent seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  std::uint64_t state = seed ^ h;
  return splitmix64(state);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  std::uint64_t state = seed + 0xD1B54A32D192ED03ULL * (index + 1);
  return splitmix64(state);
}

/// xoshiro256** with splitmix64 seeding. All conversions to reals and
/// integers are done here rather than through <random> distributions, whose
/// output is implementation-defined; that keeps every stream bit-identical
/// across compilers and platforms.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& s : state_) s = splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    const std::uint64_t result = std::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = std::rotl(state_[3], 45);
    return result;
  }

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent generator for a labelled sub-task.
  Rng split(std::string_view label) const { return Rng(derive_seed(seed_, label)); }

  /// 53-bit uniform in [0, 1).
  double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) {
    if (!(lo < hi)) throw ArgumentError("rng_uniform: require lo < hi");
    double v = lo + (hi - lo) * uniform01();
    return v < hi ? v : lo;  // guards the rounding edge when hi-lo is tiny
  }

  /// Uniform integer in [0, n) by Lemire's multiply-shift with rejection.
  std::size_t index(std::size_t n) {
    if (n == 0) throw ArgumentError("rng_index: empty range");
    const std::uint64_t range = n;
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * range;
    auto low = static_cast<std::uint64_t>(m);
    if (low < range) {
      const std::uint64_t threshold = (0 - range) % range;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * range;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::size_t>(m >> 64);
  }

  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Poisson draw: inversion by multiplication for small means, rounded
  /// normal approximation above 30.
  std::int64_t poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) throw ArgumentError("rng_poisson: mean must be finite and >= 0");
    if (mean == 0.0) return 0;
    if (mean < 30.0) {
      const double limit = std::exp(-mean);
      std::int64_t k = 0;
      double p = uniform01();
      while (p > limit) {
        ++k;
        p *= uniform01();
      }
      return k;
    }
    const double v = std::round(mean + std::sqrt(mean) * normal());
    return v < 0.0 ? 0 : static_cast<std::int64_t>(v);
  }

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  template <class T>
  void shuffle(std::vector<T>& items) {
    shuffle(std::span<T>(items));
  }

  /// k distinct indices from [0, n), in draw order.
  std::vector<std::size_t> choice(std::size_t n, std::size_t k) {
    if (k > n) throw ArgumentError("rng_choice: cannot draw " + std::to_string(k) + " of " + std::to_string(n));
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + index(n - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace malcast
