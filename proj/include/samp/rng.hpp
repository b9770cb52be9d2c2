#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace samp {

// Seeded mt19937_64 with hand-rolled draw helpers so every consumer makes a
// fixed, documented number of engine calls per draw (one). The standard
// distributions are implementation-defined in how they consume the stream;
// these are not, which keeps run reproducibility a property of the seed
// rather than of the standard library build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1), 53-bit resolution, one engine call.
  double u01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform real in [lo, hi), one engine call.
  double range(double lo, double hi) { return lo + (hi - lo) * u01(); }

  // Uniform integer in [0, n), one engine call (Lemire multiply-shift).
  std::uint64_t index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

  // Uniform integer in [lo, hi] inclusive, one engine call.
  long long int_range(long long lo, long long hi) {
    return lo + static_cast<long long>(index(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // Fisher-Yates, n-1 engine calls for n elements.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace samp
