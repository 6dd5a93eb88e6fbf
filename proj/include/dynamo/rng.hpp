// Seeded random source with fully specified scalar transforms.
//
// The engine is std::mt19937_64, whose output stream is pinned by the C++
// standard, and every distribution here is derived from it by an explicit
// documented transform (no std::*_distribution, whose streams vary across
// standard libraries). A reimplementation that adopts the same engine and
// transforms reproduces the exact streams; otherwise only statistical
// properties carry over.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace dynamo {

class Rng {
 public:
  // `stream` separates independent substreams of the same logical seed
  // (e.g. structure draws vs. noise draws of a simulated process).
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream & 0xffffffffu),
                      static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1): top 53 bits of the engine output scaled by 2^-53.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via the basic Box-Muller transform. One draw consumes
  // two uniforms; the sine partner is discarded to keep the stream a pure
  // function of the call count.
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1]; keeps log() finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Uniform integer in [0, n) by rejection on the low bits' modulo bias.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Fisher-Yates shuffle.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dynamo
