#pragma once

// Counter-based random streams.
//
// Every random quantity in the library is a pure function of (seed, stream,
// counter). Streams are derived from a master seed with `derive_seed`, which is
// a bijection in the stream index for a fixed master, so distinct indices never
// collide. Draws are the SplitMix64 sequence evaluated at an arbitrary counter,
// which makes generation order irrelevant and parallel synthesis reproducible.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <utility>

namespace lcf {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 output finalizer (a bijection on 64-bit words).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Sub-stream key for `index` under `master`: mix64(master ^ mix64(index)).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(master ^ mix64(index));
}

/// The `counter`-th SplitMix64 output of the stream keyed by `key`.
constexpr std::uint64_t stream_bits(std::uint64_t key, std::uint64_t counter) {
  return mix64(key + (counter + 1) * kGolden);
}

/// Uniform on [0, 1) with 53 random bits.
constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Uniform on (0, 1].
constexpr double to_unit_open_low(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Box–Muller pair of independent standard normals for pair index `pair`.
inline std::pair<double, double> normal_pair(std::uint64_t key, std::uint64_t pair) {
  const double u1 = to_unit_open_low(stream_bits(key, 2 * pair));
  const double u2 = to_unit(stream_bits(key, 2 * pair + 1));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(t), r * std::sin(t)};
}

/// Sequential generator over one stream; satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t key = 0) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return stream_bits(key_, counter_++); }

  double uniform() { return to_unit((*this)()); }

  /// Uniform integer in [0, bound) by multiply-shift; bias < 2^-64 · bound.
  std::uint64_t below(std::uint64_t bound) {
    __extension__ using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>((*this)()) * bound) >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    auto [a, b] = normal_pair(key_ ^ 0xA5A5A5A5A5A5A5A5ULL, normal_counter_++);
    spare_ = b;
    has_spare_ = true;
    return a;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::uint64_t normal_counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace lcf
