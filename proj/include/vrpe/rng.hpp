#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace vrpe {

/// Counter-based generator: output i of a stream is a keyed hash of i, so a
/// stream is fully described by (key, counter). Streams are derived from
/// (base_seed, stream_index) and can be replayed independently of how trials
/// are scheduled across workers.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(derive_key(seed, stream)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return hash(key_, counter_++); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; consumes exactly two outputs.
  double normal() {
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Independent child stream; does not advance this generator.
  CounterRng split(std::uint64_t stream) const {
    CounterRng child(0, 0);
    child.key_ = hash(key_ ^ 0x6a09e667f3bcc909ULL, stream);
    return child;
  }

  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t fmix(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
  }

  static constexpr std::uint64_t hash(std::uint64_t key, std::uint64_t counter) {
    // Two keyed rounds; a single splitmix round on key + counter would let
    // streams with nearby keys overlap.
    const std::uint64_t a = fmix(counter * 0x9e3779b97f4a7c15ULL + key);
    return fmix(a ^ (key * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
  }

  static constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
    return hash(fmix(seed + 0x243f6a8885a308d3ULL), stream);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace vrpe
