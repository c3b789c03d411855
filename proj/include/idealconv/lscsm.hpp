#pragma once

// Lower semicontinuous submeasures on N.
//
// Every variant is determined by its finite truncations, so phi(A) is always
// computed as phi(A ∩ [1, N]) for a caller-chosen horizon N. Values are exact
// rationals; the double-valued helpers exist only for the numeric estimators.

#include "idealconv/kernels.hpp"
#include "idealconv/natset.hpp"
#include "idealconv/rational.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace idealconv {

enum class LscsmKind { DensityFamily, RunningDensity, WeightedSum, CountingCap };

std::string to_string(LscsmKind k);

// Partition of N into consecutive intervals D_n = [ends[n-1], ends[n]) given
// by an explicit prefix, continued by doubling the last endpoint.
struct BlockPartition {
  std::vector<std::uint64_t> ends{1, 2};

  static BlockPartition doubling() { return BlockPartition{}; }
  // D_n for n >= 1 (1-based): [lo, hi).
  std::pair<std::uint64_t, std::uint64_t> block(std::uint64_t n) const;
  std::uint64_t block_of(std::uint64_t i) const;
};

enum class WeightRule { Harmonic, Table };

class Lscsm {
 public:
  static Lscsm running_density();
  static Lscsm counting_cap();
  // w_a = 1/a, phi(A) = min(cap, sum).
  static Lscsm harmonic(const Rational& cap);
  // Explicit weights for 1..len, zero beyond.
  static Lscsm weighted_table(std::vector<Rational> weights, const Rational& cap);
  // Weights are cycled: block n uses weights[(n-1) % size].
  static Lscsm density_family(BlockPartition blocks, std::vector<Rational> weights);

  LscsmKind kind() const { return kind_; }
  WeightRule weight_rule() const { return rule_; }
  const Rational& cap() const { return cap_; }
  const Rational& scale() const { return scale_; }
  const BlockPartition& blocks() const { return blocks_; }
  const std::vector<Rational>& weights() const { return weights_; }

  // ||N||_phi before scaling; nullopt when it is zero (nothing to normalize).
  std::optional<Rational> raw_norm_of_n() const;
  // Copy rescaled so that ||N||_phi = 1. Throws InvalidArgument when ||N|| = 0.
  Lscsm normalized() const;

  // phi(s ∩ [1, N]).
  Rational phi(const NatSet& s, std::uint64_t N) const;
  // phi of a finite set given as increasing positive integers.
  Rational phi_finite(std::span<const std::uint64_t> sorted) const;
  // phi([lo, hi]) for 1 <= lo <= hi.
  Rational phi_interval(std::uint64_t lo, std::uint64_t hi) const;
  // A rational r with r <= phi([lo, hi]); exact when cheap, a certified
  // chunked lower bound for long harmonic ranges.
  Rational phi_interval_lower(std::uint64_t lo, std::uint64_t hi) const;
  // phi(bits ∩ (lo, hi]) in floating point, for estimators.
  double phi_tail_double(std::span<const std::uint8_t> bits, std::uint64_t lo, std::uint64_t hi) const;
  // phi((lo, hi]) in floating point.
  double phi_full_tail_double(std::uint64_t lo, std::uint64_t hi) const;

  std::string describe() const;
  nlohmann::json to_json() const;

 private:
  double weight_double(std::uint64_t a) const;
  Rational weight(std::uint64_t a) const;
  const Rational& block_weight(std::uint64_t n) const;

  LscsmKind kind_ = LscsmKind::RunningDensity;
  WeightRule rule_ = WeightRule::Harmonic;
  Rational cap_ = 1;
  Rational scale_ = 1;
  BlockPartition blocks_;
  std::vector<Rational> weights_;
};

// Incremental phi for a set grown by appending increasing integers.
class PhiAccumulator {
 public:
  explicit PhiAccumulator(const Lscsm& m) : m_(&m) {}
  void add(std::uint64_t a);
  Rational value() const;
  std::uint64_t size() const { return count_; }

 private:
  const Lscsm* m_;
  std::uint64_t count_ = 0;
  RatioWitness best_{0, 1};
  Rational sum_ = 0;
  std::uint64_t cur_block_ = 0;
  std::uint64_t cur_count_ = 0;
  Rational block_best_ = 0;
};

}  // namespace idealconv
