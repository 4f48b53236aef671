#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>
#include <vector>

namespace georf {

// splitmix64 finalizer; used for seed derivation so that per-task seeds are
// decorrelated regardless of how small the inputs are.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t seed_mix(std::uint64_t seed, std::uint64_t v) {
  return splitmix64(seed ^ (splitmix64(v) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

inline std::uint64_t seed_mix(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 1469598103934665603ULL; // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return seed_mix(seed, h);
}

template <typename... Rest>
inline std::uint64_t seed_mix(std::uint64_t seed, std::string_view tag, std::uint64_t v, Rest... rest) {
  std::uint64_t s = seed_mix(seed_mix(seed, tag), v);
  if constexpr (sizeof...(rest) == 0) {
    return s;
  } else {
    return seed_mix(s, rest...);
  }
}

// Deterministic RNG. mt19937_64 output is fully specified by the standard;
// the distribution helpers below are hand-rolled so that draws are identical
// across standard library implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  /// Uniform index in [0, n). Rejection sampling, no modulo bias.
  std::size_t next_index(std::size_t n) {
    const std::uint64_t m = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = m - m % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return static_cast<std::size_t>(x % n);
  }

  /// Standard normal via Box-Muller (pair cached).
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_unit();
    while (u1 <= 0.0) u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[next_index(i)]);
    }
  }

private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

} // namespace georf
