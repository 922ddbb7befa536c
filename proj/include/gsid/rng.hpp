#pragma once

#include <cstdint>

namespace gsid {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based stream: draw k is a pure function of (seed, k), so any
/// element can be regenerated without replaying the stream.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) : key_(splitmix64(seed)) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return splitmix64(key_ ^ splitmix64(counter));
  }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  constexpr double uniform(std::uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1p-53;
  }

 private:
  std::uint64_t key_;
};

/// Seed for run `index` of an ensemble keyed by `base`.
inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

}  // namespace gsid
