#pragma once

// Data-parallel inner loops. Every kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::parallel; the unqualified
// kernels:: names forward to the parallel versions. Tests hold the two equal.

#include "idealconv/rational.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace idealconv {

// Bit i-1 stores membership of the integer i.
using Bits = std::vector<std::uint8_t>;

// Best ratio count / n found by a running-density scan.
struct RatioWitness {
  std::uint64_t count = 0;
  std::uint64_t n = 1;
  Rational value() const { return Rational(BigInt(count), BigInt(n)); }
};

// Points stored row-major: point j (0-based) occupies coords[j*dim .. j*dim+dim).
struct PointBlock {
  std::size_t dim = 1;
  std::span<const Frac> coords;
  std::size_t size() const { return dim ? coords.size() / dim : 0; }
};

namespace kernels {

namespace serial {
void or_into(Bits& dst, std::span<const std::uint8_t> src);
void and_into(Bits& dst, std::span<const std::uint8_t> src);
void flip(Bits& bits);
std::uint64_t popcount(std::span<const std::uint8_t> bits);
// sup over n in (cut, upto] of |bits ∩ (cut, n]| / n.
RatioWitness tail_running_density(std::span<const std::uint8_t> bits, std::uint64_t cut, std::uint64_t upto);
Bits ball_hits(const PointBlock& pts, std::span<const Frac> center, const Frac& radius);
Bits cell_hits(const PointBlock& pts, std::span<const Frac> center, const Frac& half);
// For each candidate, the number of points with index in (lo, hi] inside the open ball.
std::vector<std::uint64_t> window_counts(const PointBlock& pts, std::span<const Frac> candidates,
                                         const Frac& radius, std::uint64_t lo, std::uint64_t hi);
}  // namespace serial

namespace parallel {
void or_into(Bits& dst, std::span<const std::uint8_t> src);
void and_into(Bits& dst, std::span<const std::uint8_t> src);
void flip(Bits& bits);
std::uint64_t popcount(std::span<const std::uint8_t> bits);
RatioWitness tail_running_density(std::span<const std::uint8_t> bits, std::uint64_t cut, std::uint64_t upto);
Bits ball_hits(const PointBlock& pts, std::span<const Frac> center, const Frac& radius);
Bits cell_hits(const PointBlock& pts, std::span<const Frac> center, const Frac& half);
std::vector<std::uint64_t> window_counts(const PointBlock& pts, std::span<const Frac> candidates,
                                         const Frac& radius, std::uint64_t lo, std::uint64_t hi);
}  // namespace parallel

using parallel::and_into;
using parallel::ball_hits;
using parallel::cell_hits;
using parallel::flip;
using parallel::or_into;
using parallel::popcount;
using parallel::tail_running_density;
using parallel::window_counts;

// a/b > c/d for nonnegative counts.
inline bool ratio_greater(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  return static_cast<unsigned __int128>(a) * d > static_cast<unsigned __int128>(c) * b;
}

}  // namespace kernels
}  // namespace idealconv
