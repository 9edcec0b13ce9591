#pragma once

// Counter-based RNG: output i is a hash of (key, i), so replicate substreams
// derived from (master seed, replicate index) are reproducible regardless of
// scheduling or thread count.

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace mmorder {

class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(mix(seed + 0x9E3779B97F4A7C15ull) ^ mix(stream + 0xD1B54A32D192ED03ull))) {}

  std::uint64_t next_u64() { return mix(key_ + (++ctr_) * 0x9E3779B97F4A7C15ull); }

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below requires n >= 1");
    std::uint64_t lim = n * (~0ull / n);
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= lim);
    return v % n;
  }

  // Knuth's product method; fine for the small means used here.
  long poisson(double mean) {
    double limit = std::exp(-mean), p = 1.0;
    long k = 0;
    do {
      ++k;
      p *= uniform01();
    } while (p > limit);
    return k - 1;
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace mmorder
