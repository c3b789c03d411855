#pragma once

// Strictly increasing maps (Sigma) and bijections (Pi) of N, their action on
// sequences and preimages of index sets.

#include "idealconv/natset.hpp"
#include "idealconv/sequence.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace idealconv {

enum class TailKind { IdentityShift, ArithmeticTail, Unfinished };
std::string to_string(TailKind k);

// sigma(1..m) = table; beyond m:
//   IdentityShift(o):  sigma(n) = n + o
//   ArithmeticTail(d): sigma(n) = sigma(m) + (n - m) d   (sigma(0) = 0)
//   Unfinished:        undefined
struct SubsequenceMap {
  std::vector<std::uint64_t> table;
  TailKind tail = TailKind::Unfinished;
  std::int64_t param = 0;

  static SubsequenceMap identity() { return {{}, TailKind::IdentityShift, 0}; }
  static SubsequenceMap shift(std::int64_t offset) { return {{}, TailKind::IdentityShift, offset}; }
  static SubsequenceMap arithmetic(std::int64_t step) { return {{}, TailKind::ArithmeticTail, step}; }

  std::uint64_t valid_to() const;
  std::optional<std::uint64_t> at(std::uint64_t n) const;
  std::uint64_t value(std::uint64_t n) const;  // throws HorizonExceeded
  // Strict monotonicity on the table and across the table/tail seam.
  void validate() const;
  bool is_identity() const { return table.empty() && tail == TailKind::IdentityShift && param == 0; }

  nlohmann::json to_json() const;
  static SubsequenceMap from_json(const nlohmann::json& j);
};

enum class PermRule { Table, SwapOddEven };

// pi(n) = head[n-1] for n <= m, far[n] for n in far, n otherwise;
// or the rule pi(2n) = 2n - 1, pi(2n - 1) = 2n.
struct PermutationMap {
  PermRule rule = PermRule::Table;
  std::vector<std::uint64_t> head;
  std::map<std::uint64_t, std::uint64_t> far;

  static PermutationMap identity() { return {}; }
  static PermutationMap swap_odd_even() { return {PermRule::SwapOddEven, {}, {}}; }
  // Completes an injective head table to a bijection: used values above m are
  // paired in order with the unused values <= m.
  static PermutationMap close_out(std::vector<std::uint64_t> head, std::uint64_t pair_limit = std::uint64_t{1} << 22);

  std::uint64_t value(std::uint64_t n) const;
  std::uint64_t support_end() const;  // beyond this, pi is the identity (or the swap rule)
  // Inverse-table check on [1, upto] (upto >= support_end for table maps).
  bool audit_bijective(std::uint64_t upto) const;

  nlohmann::json to_json() const;
  static PermutationMap from_json(const nlohmann::json& j);
};

SequenceSpec apply(const SubsequenceMap& sigma, const SequenceSpec& x);
SequenceSpec apply(const PermutationMap& pi, const SequenceSpec& x);

// {n : t(n) in s}. Symbolic when the map has an affine tail (or is a table
// permutation) and s is structured; otherwise a bitmap up to the horizon.
NatSet preimage(const SubsequenceMap& sigma, const NatSet& s, std::uint64_t horizon);
NatSet preimage(const PermutationMap& pi, const NatSet& s, std::uint64_t horizon);

// Light algebraic clean-up (empty/full absorption, progression intersections).
NatSet simplify(const NatSet& s);

enum class GapLaw { Geometric, Uniform };
struct GapSpec {
  GapLaw law = GapLaw::Geometric;
  double p = 0.5;          // geometric success probability
  std::uint64_t g = 4;     // uniform on 1..g
};

// Heuristic diagnostics only: reproducible pseudo-random maps of length `length`.
SubsequenceMap random_sigma(std::uint64_t seed, const GapSpec& gaps, std::uint64_t length);
PermutationMap random_pi(std::uint64_t seed, std::uint64_t window, std::uint64_t length);

}  // namespace idealconv
