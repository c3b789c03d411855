#pragma once

// Brute-force oracles and random generators shared by the unit tests.

#include "idealconv/lscsm.hpp"
#include "idealconv/natset.hpp"
#include "idealconv/rng.hpp"

#include <algorithm>
#include <vector>

namespace idealconv::testing {

inline std::vector<std::uint64_t> random_finite(Rng& rng, std::uint64_t max_value, std::uint64_t max_size) {
  std::vector<std::uint64_t> v;
  const std::uint64_t k = rng.range(0, max_size);
  for (std::uint64_t i = 0; i < k; ++i) v.push_back(rng.range(1, max_value));
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline NatSet random_leaf(Rng& rng) {
  switch (rng.range(0, 4)) {
    case 0: return NatSet::finite(random_finite(rng, 200, 12));
    case 1: return NatSet::cofinite(random_finite(rng, 200, 12));
    case 2: return NatSet::progression(rng.range(1, 12), rng.range(1, 12));
    case 3: return NatSet::powers_of(rng.range(2, 5));
    default: return NatSet::block_union(WitnessIntervals::geometric(2, Rational(1, 2)), BlockSelector::every_kth(rng.range(1, 3)));
  }
}

inline NatSet random_tree(Rng& rng, int depth) {
  if (depth == 0 || rng.range(0, 2) == 0) return random_leaf(rng);
  switch (rng.range(0, 2)) {
    case 0: return NatSet::set_union(random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 1: return NatSet::set_intersection(random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    default: return NatSet::complement(random_tree(rng, depth - 1));
  }
}

// sup_n |A ∩ [1, n]| / n over the sorted members.
inline Rational brute_running_density(const std::vector<std::uint64_t>& a) {
  Rational best = 0;
  for (std::size_t i = 0; i < a.size(); ++i) best = std::max(best, Rational(BigInt(i + 1), BigInt(a[i])));
  return best;
}

inline Rational brute_harmonic(const std::vector<std::uint64_t>& a, const Rational& cap) {
  Rational s = 0;
  for (auto x : a) s += Rational(BigInt(1), BigInt(x));
  return std::min(s, cap) / cap;
}

inline std::vector<std::uint64_t> set_union(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  std::vector<std::uint64_t> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline bool is_subset(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace idealconv::testing
