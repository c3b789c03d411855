#include "idealconv/kernels.hpp"

#include <omp.h>

#include <algorithm>

namespace idealconv::kernels {

namespace {

bool point_in_ball(const PointBlock& pts, std::size_t j, std::span<const Frac> center, const Frac& radius) {
  for (std::size_t c = 0; c < pts.dim; ++c) {
    if (!within_open(pts.coords[j * pts.dim + c], center[c], radius)) return false;
  }
  return true;
}

bool point_in_cell(const PointBlock& pts, std::size_t j, std::span<const Frac> center, const Frac& half) {
  for (std::size_t c = 0; c < pts.dim; ++c) {
    if (!within_cell(pts.coords[j * pts.dim + c], center[c], half)) return false;
  }
  return true;
}

}  // namespace

namespace serial {

void or_into(Bits& dst, std::span<const std::uint8_t> src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
}

void and_into(Bits& dst, std::span<const std::uint8_t> src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] &= src[i];
}

void flip(Bits& bits) {
  for (auto& b : bits) b ^= 1;
}

std::uint64_t popcount(std::span<const std::uint8_t> bits) {
  std::uint64_t total = 0;
  for (auto b : bits) total += b;
  return total;
}

RatioWitness tail_running_density(std::span<const std::uint8_t> bits, std::uint64_t cut, std::uint64_t upto) {
  RatioWitness best{0, upto ? upto : 1};
  std::uint64_t count = 0;
  for (std::uint64_t n = cut + 1; n <= upto; ++n) {
    count += bits[n - 1];
    if (ratio_greater(count, n, best.count, best.n)) best = {count, n};
  }
  return best;
}

Bits ball_hits(const PointBlock& pts, std::span<const Frac> center, const Frac& radius) {
  Bits out(pts.size(), 0);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = point_in_ball(pts, j, center, radius);
  return out;
}

Bits cell_hits(const PointBlock& pts, std::span<const Frac> center, const Frac& half) {
  Bits out(pts.size(), 0);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = point_in_cell(pts, j, center, half);
  return out;
}

std::vector<std::uint64_t> window_counts(const PointBlock& pts, std::span<const Frac> candidates,
                                         const Frac& radius, std::uint64_t lo, std::uint64_t hi) {
  const std::size_t ncand = pts.dim ? candidates.size() / pts.dim : 0;
  std::vector<std::uint64_t> out(ncand, 0);
  for (std::size_t c = 0; c < ncand; ++c) {
    const auto center = candidates.subspan(c * pts.dim, pts.dim);
    for (std::uint64_t n = lo + 1; n <= hi; ++n) out[c] += point_in_ball(pts, n - 1, center, radius);
  }
  return out;
}

}  // namespace serial

namespace parallel {

void or_into(Bits& dst, std::span<const std::uint8_t> src) {
  const auto n = static_cast<std::int64_t>(dst.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) dst[i] |= src[i];
}

void and_into(Bits& dst, std::span<const std::uint8_t> src) {
  const auto n = static_cast<std::int64_t>(dst.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) dst[i] &= src[i];
}

void flip(Bits& bits) {
  const auto n = static_cast<std::int64_t>(bits.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) bits[i] ^= 1;
}

std::uint64_t popcount(std::span<const std::uint8_t> bits) {
  const auto n = static_cast<std::int64_t>(bits.size());
  std::uint64_t total = 0;
#pragma omp parallel for reduction(+ : total) schedule(static)
  for (std::int64_t i = 0; i < n; ++i) total += bits[i];
  return total;
}

RatioWitness tail_running_density(std::span<const std::uint8_t> bits, std::uint64_t cut, std::uint64_t upto) {
  if (upto <= cut) return RatioWitness{0, upto ? upto : 1};
  const std::uint64_t len = upto - cut;
  const int threads = omp_get_max_threads();
  const std::uint64_t chunks = std::min<std::uint64_t>(static_cast<std::uint64_t>(threads), len);
  if (chunks <= 1) return serial::tail_running_density(bits, cut, upto);
  // Pass 1: chunk popcounts. Pass 2: scan each chunk from its prefix offset.
  std::vector<std::uint64_t> chunk_count(chunks, 0);
  const std::uint64_t step = (len + chunks - 1) / chunks;
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
    const std::uint64_t lo = cut + c * step;
    const std::uint64_t hi = std::min(upto, lo + step);
    std::uint64_t s = 0;
    for (std::uint64_t n = lo + 1; n <= hi; ++n) s += bits[n - 1];
    chunk_count[c] = s;
  }
  std::vector<std::uint64_t> offset(chunks, 0);
  for (std::uint64_t c = 1; c < chunks; ++c) offset[c] = offset[c - 1] + chunk_count[c - 1];
  std::vector<RatioWitness> best(chunks, RatioWitness{0, upto});
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
    const std::uint64_t lo = cut + c * step;
    const std::uint64_t hi = std::min(upto, lo + step);
    std::uint64_t count = offset[c];
    RatioWitness local{0, upto};
    for (std::uint64_t n = lo + 1; n <= hi; ++n) {
      count += bits[n - 1];
      if (ratio_greater(count, n, local.count, local.n)) local = {count, n};
    }
    best[c] = local;
  }
  // Ties resolve to the smallest n, as in the serial scan.
  RatioWitness out{0, upto};
  for (const auto& b : best) {
    if (ratio_greater(b.count, b.n, out.count, out.n)) out = b;
  }
  return out;
}

Bits ball_hits(const PointBlock& pts, std::span<const Frac> center, const Frac& radius) {
  Bits out(pts.size(), 0);
  const auto n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < n; ++j) out[j] = point_in_ball(pts, j, center, radius);
  return out;
}

Bits cell_hits(const PointBlock& pts, std::span<const Frac> center, const Frac& half) {
  Bits out(pts.size(), 0);
  const auto n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < n; ++j) out[j] = point_in_cell(pts, j, center, half);
  return out;
}

std::vector<std::uint64_t> window_counts(const PointBlock& pts, std::span<const Frac> candidates,
                                         const Frac& radius, std::uint64_t lo, std::uint64_t hi) {
  const std::size_t ncand = pts.dim ? candidates.size() / pts.dim : 0;
  std::vector<std::uint64_t> out(ncand, 0);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(ncand); ++c) {
    const auto center = candidates.subspan(c * pts.dim, pts.dim);
    std::uint64_t s = 0;
    for (std::uint64_t n = lo + 1; n <= hi; ++n) s += point_in_ball(pts, n - 1, center, radius);
    out[c] = s;
  }
  return out;
}

}  // namespace parallel

}  // namespace idealconv::kernels
