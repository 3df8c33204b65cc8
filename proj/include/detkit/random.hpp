#pragma once

#include <cstdint>

namespace detkit {

/// Counter-based random stream: the n-th draw is a pure function of
/// (seed, index, n), so results never depend on scheduling or on how many
/// other streams exist.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t index)
      : key_(mix(seed ^ mix(index + 0x9e3779b97f4a7c15ULL))) {}

  std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool coin() { return (next_u64() >> 63) != 0; }

  /// SplitMix64 finalizer.
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace detkit
