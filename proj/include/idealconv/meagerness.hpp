#pragma once

// Witness intervals for meager ideals and the closed sets F_k they induce.

#include "idealconv/ideal.hpp"
#include "idealconv/natset.hpp"
#include "idealconv/witness.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace idealconv {

// fin: singletons; density-zero: geometric density-ratio blocks starting at 2;
// fin-x-fin: row coverage; anything else with an lscsm: greedy phi-blocks.
WitnessIntervals build_witness(const IdealHandle& I, const Rational& q = Rational(1, 2),
                               std::uint64_t horizon = std::uint64_t{1} << 20);

struct CertificationReport {
  bool ok = true;
  std::uint64_t blocks_checked = 0;
  std::optional<std::uint64_t> failing_block;
  Rational min_mass = 1;  // smallest certified block quantity (ratio or phi)
};

// Re-checks the certifying inequality for every block ending at or below horizon.
CertificationReport certify_witness(const IdealHandle& I, const WitnessIntervals& w, std::uint64_t horizon);

// Does every row nu2 = r, r <= n, meet block n?  (row-coverage rule)
bool block_covers_rows(std::uint64_t lo, std::uint64_t hi_exclusive, std::uint64_t rows);

// s ∈ F_k: no block I_n with n >= k is contained in s.
Tri fk_holds(const WitnessIntervals& w, const NatSet& s, std::uint64_t k, std::uint64_t horizon);

struct VerifyReport {
  std::string ideal;
  std::uint64_t trials = 0;
  std::uint64_t not_in = 0;
  std::uint64_t undecided = 0;
  double min_density_estimate = 1.0;  // block-end running density (lscsm ideals)
  Rational min_block_phi = 1;         // smallest phi(I_n) over selected blocks
  std::uint64_t rows_required = 0;    // fin-x-fin: rows r <= this must be hit
  std::uint64_t row_failures = 0;
  std::uint64_t members = 0;
  std::uint64_t members_separated = 0;  // exists k <= K with fk_holds true
  std::uint64_t cofinite_samples = 0;
  std::uint64_t cofinite_rejected = 0;  // fk_holds false for all k <= K
  bool passed = false;
  nlohmann::json to_json() const;
};

// Throws WitnessRefuted when a sample violates certification.
VerifyReport verify_witness(const IdealHandle& I, const WitnessIntervals& w, std::uint64_t trials,
                            std::uint64_t horizon, std::uint64_t seed, std::uint64_t K = 20);

// Structured members of I used for the F_sigma separation check.
std::vector<NatSet> sample_members(const IdealHandle& I, const WitnessIntervals& w, std::uint64_t count,
                                   std::uint64_t K, std::uint64_t seed);

}  // namespace idealconv
