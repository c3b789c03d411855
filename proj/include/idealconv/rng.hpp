#pragma once

// Seeded randomness with draws defined here rather than by the standard
// library distributions, whose outputs differ between implementations.

#include <cstdint>
#include <random>
#include <vector>

namespace idealconv {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }
  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  // Uniform on [lo, hi].
  std::uint64_t range(std::uint64_t lo, std::uint64_t hi);
  // Number of trials up to and including the first success, p in (0, 1].
  std::uint64_t geometric(double p);
  bool bernoulli(double p) { return uniform() < p; }
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[range(0, i - 1)]);
  }
  // Independent stream for trial `index`.
  static std::uint64_t split(std::uint64_t seed, std::uint64_t index);

 private:
  std::mt19937_64 eng_;
};

}  // namespace idealconv
