#pragma once

#include <cstdint>

namespace oslc {

// Counter-based generator: output m = mix(key, counter). Streams derived via
// split() are independent and reproducible across platforms, which keeps
// Monte-Carlo oracles bit-stable for a fixed seed.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ 0x9e3779b97f4a7c15ull, stream)), ctr_(0) {}

  std::uint64_t next_u64() { return mix(key_, ctr_++); }

  // Uniform in [0, 1).
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  CounterRng split(std::uint64_t stream) const { return CounterRng(key_, stream + 1); }

 private:
  CounterRng(std::uint64_t key, std::uint64_t stream, int)
      : key_(mix(key, stream)), ctr_(0) {}

  // splitmix64-style finalizer applied to (key, counter).
  static std::uint64_t mix(std::uint64_t key, std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull + key * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t key_;
  std::uint64_t ctr_;
};

}  // namespace oslc
