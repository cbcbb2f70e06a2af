#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "fasttls/errors.hpp"

namespace fasttls {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

// Derives an independent stream seed from a master seed, a label naming the
// consumer (e.g. "s1", "split"), and an optional index. Every randomized
// component draws from its own derived stream so that results are a pure
// function of (inputs, master seed) regardless of evaluation order.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                           std::uint64_t index = 0) noexcept {
  std::uint64_t h = detail::splitmix64(master ^ detail::fnv1a(label));
  return detail::splitmix64(h ^ detail::splitmix64(index));
}

// Seedable generator with the few distributions the library needs. The
// distributions are implemented here (not with std::*_distribution) so that
// identical seeds give identical streams on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::int64_t uniform_index(std::int64_t n) {
    if (n <= 0) throw DegenerateInputError("uniform_index: empty range");
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return static_cast<std::int64_t>(x % un);
  }

  int rademacher() { return (next_u64() & 1u) ? 1 : -1; }

  // Standard normal via Box-Muller; one spare value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fasttls
