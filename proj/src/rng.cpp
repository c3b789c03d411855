#include "idealconv/rng.hpp"

#include <cmath>
#include <limits>

namespace idealconv {

std::uint64_t Rng::range(std::uint64_t lo, std::uint64_t hi) {
  if (hi <= lo) return lo;
  const std::uint64_t span = hi - lo + 1;
  if (span == 0) return eng_();
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t v;
  do {
    v = eng_();
  } while (v >= limit);
  return lo + v % span;
}

std::uint64_t Rng::geometric(double p) {
  if (p >= 1.0) return 1;
  std::uint64_t n = 1;
  while (!bernoulli(p) && n < (std::uint64_t{1} << 20)) ++n;
  return n;
}

std::uint64_t Rng::split(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over (seed, index)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace idealconv
