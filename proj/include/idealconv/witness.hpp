#pragma once

#include "idealconv/rational.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace idealconv {

// How a witness certifies that a set containing infinitely many of its blocks
// lies outside the ideal.
enum class CertRule { DensityRatio, PhiBlock, RowCoverage };

enum class WitnessGenerator {
  Geometric,    // iota_{n+1} = max(iota_n + 1, ceil(iota_n / (1 - q)))
  Unit,         // iota_n = n (singleton blocks)
  RowCoverage,  // iota_1 = 1, iota_{n+1} = iota_n + 2^{n+1}
  Table,        // explicit finite table
};

std::string to_string(CertRule rule);
std::string to_string(WitnessGenerator gen);
CertRule cert_rule_from_string(const std::string& s);
WitnessGenerator witness_generator_from_string(const std::string& s);

// Strictly increasing iota_1 < iota_2 < ... with blocks I_n = [iota_n, iota_{n+1}).
// Closed-form generators are materialized up to 2^62; tables stop where the
// search that produced them stopped, and anything beyond is unknown.
class WitnessIntervals {
 public:
  static WitnessIntervals geometric(std::uint64_t start, const Rational& q);
  static WitnessIntervals unit();
  static WitnessIntervals row_coverage();
  static WitnessIntervals table(std::vector<std::uint64_t> iota, CertRule rule, const Rational& q0);

  WitnessGenerator generator() const { return data_->generator; }
  CertRule rule() const { return data_->rule; }
  const Rational& q0() const { return data_->q0; }
  // Name of the ideal this witness was built for ("" when free-standing).
  const std::string& ideal() const { return data_->ideal; }
  WitnessIntervals with_certificate(CertRule rule, const Rational& q0, std::string ideal) const;

  // Geometric parameters (meaningful for Geometric only).
  std::uint64_t start() const { return data_->start; }
  const Rational& ratio_q() const { return data_->q; }

  // iota_n for n >= 1; nullopt when not known.
  std::optional<std::uint64_t> iota(std::uint64_t n) const;
  // Number of blocks whose both endpoints are known.
  std::uint64_t known_blocks() const;
  // Block index n with i in I_n; 0 when i < iota_1; nullopt when unknown.
  std::optional<std::uint64_t> block_of(std::uint64_t i) const;
  // Block lengths are non-decreasing and unbounded (every closed form but Unit).
  bool lengths_grow() const;
  // Materialized iota values not exceeding `limit` (plus the first one above it).
  std::vector<std::uint64_t> iota_prefix(std::uint64_t limit) const;

  friend bool operator==(const WitnessIntervals& a, const WitnessIntervals& b);

 private:
  struct Data {
    WitnessGenerator generator = WitnessGenerator::Unit;
    CertRule rule = CertRule::PhiBlock;
    Rational q0 = 1;
    std::string ideal;
    std::uint64_t start = 1;
    Rational q = 0;
    std::vector<std::uint64_t> iota;  // empty for Unit
  };
  explicit WitnessIntervals(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
  std::shared_ptr<const Data> data_;
};

}  // namespace idealconv
