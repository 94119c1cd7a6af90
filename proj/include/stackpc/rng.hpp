#pragma once

// Counter-based SplitMix64 streams. A stream is identified by a key derived
// from (seed, role, index, ...), and its n-th draw is a pure function of
// (key, n), so results never depend on which worker ran what first.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace stackpc {

enum class StreamRole : std::uint64_t {
  drop = 1,
  sbs_placement = 2,
  sue_placement = 3,
  mue_placement = 4,
  shadowing = 5,
  test_instance = 6,
};

inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t key = splitmix64_mix(seed + 0x9e3779b97f4a7c15ULL);
  for (std::uint64_t part : path) key = splitmix64_mix(key ^ splitmix64_mix(part + 0x632be59bd9b4e019ULL));
  return key;
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}
  CounterRng(std::uint64_t seed, StreamRole role, std::uint64_t index = 0)
      : key_(derive_key(seed, {static_cast<std::uint64_t>(role), index})) {}

  std::uint64_t next_u64() {
    ++counter_;
    return splitmix64_mix(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal by Box-Muller (one value per call).
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace stackpc
