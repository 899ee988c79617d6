#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <utility>

namespace needlets {

/// SplitMix64 finalizer; used both as a stream mixer and as a counter hash.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive a child seed from a parent seed and a list of integer keys.
/// Order of keys matters; equal inputs always give equal outputs.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
  for (auto k : keys) h = mix64(h ^ mix64(k + 0x3c6ef372fe94f82bULL));
  return h;
}

/// Map 64 random bits to a double in [0, 1).
constexpr double bits_to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Map 64 random bits to a double in (0, 1].
constexpr double bits_to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

/// Two independent standard normals addressed by (seed, key...).  Counter
/// based: the value depends only on its address, never on call order.
inline std::pair<double, double> counter_normal_pair(std::uint64_t seed, std::uint64_t k1, std::uint64_t k2) {
  const std::uint64_t base = derive_seed(seed, {k1, k2});
  const double u1 = bits_to_open_unit(mix64(base));
  const double u2 = bits_to_unit(mix64(base ^ 0xa54ff53a5f1d36f1ULL));
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * std::numbers::pi * u2;
  return {rad * std::cos(ang), rad * std::sin(ang)};
}

/// Small sequential generator (SplitMix64 stream); satisfies
/// UniformRandomBitGenerator so it can feed std algorithms if needed.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return bits_to_unit((*this)()); }
  double normal() {
    const double u1 = bits_to_open_unit((*this)());
    const double u2 = bits_to_unit((*this)());
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace needlets
