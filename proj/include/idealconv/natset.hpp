#pragma once

// Symbolic subsets of the positive integers.
//
// A NatSet is an immutable expression tree over a closed family of leaves
// (finite, cofinite, arithmetic progression, powers of a base, unions of
// witness blocks, prefix bitmaps) combined by union, intersection and
// complement. Membership is tri-state: bitmaps are undecided above their
// horizon and table-backed witnesses beyond their last known endpoint.

#include "idealconv/kernels.hpp"
#include "idealconv/witness.hpp"

#include "json.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace idealconv {

enum class Tri : std::uint8_t { False, True, Unknown };

std::string to_string(Tri t);
inline Tri tri(bool b) { return b ? Tri::True : Tri::False; }

inline constexpr int kMaxDepth = 32;

class NatSet;

namespace detail {
struct Node;
}

enum class SelectorKind { All, EveryKth, IndexSet };

// Which witness blocks a BlockUnion takes: all, those with index divisible by
// k, or the indices in a NatSet.
class BlockSelector {
 public:
  static BlockSelector all();
  static BlockSelector every_kth(std::uint64_t k);
  static BlockSelector index_set(const NatSet& s);

  SelectorKind kind() const { return kind_; }
  std::uint64_t k() const { return k_; }
  const NatSet& indices() const;
  Tri selects(std::uint64_t block) const;
  Tri is_infinite() const;

 private:
  SelectorKind kind_ = SelectorKind::All;
  std::uint64_t k_ = 1;
  std::shared_ptr<const NatSet> indices_;
};

enum class SetKind { Finite, Cofinite, Progression, PowersOf, BlockUnion, Bitmap, Union, Intersection, Complement };

// Eventually periodic description: n in P iff residues[n % period], for n >= settle.
struct PeriodicForm {
  std::uint64_t period = 1;
  std::vector<std::uint8_t> residues{0};
  std::uint64_t settle = 1;

  std::uint64_t ones() const;
  bool all_ones() const { return ones() == period; }
  bool empty() const { return ones() == 0; }
  Rational density() const;
};

class NatSet {
 public:
  static NatSet finite(std::vector<std::uint64_t> elements);
  static NatSet cofinite(std::vector<std::uint64_t> excluded);
  static NatSet progression(std::uint64_t first, std::uint64_t step);
  static NatSet powers_of(std::uint64_t base);
  static NatSet block_union(const WitnessIntervals& w, const BlockSelector& sel);
  static NatSet bitmap(Bits bits);
  static NatSet set_union(const NatSet& a, const NatSet& b);
  static NatSet set_intersection(const NatSet& a, const NatSet& b);
  static NatSet complement(const NatSet& a);
  static NatSet empty() { return finite({}); }
  static NatSet all() { return cofinite({}); }
  // [lo, hi] as a finite set; hi < lo gives the empty set.
  static NatSet interval(std::uint64_t lo, std::uint64_t hi);

  SetKind kind() const;
  int depth() const;

  // Leaf accessors; calling one for the wrong kind throws InvalidArgument.
  const std::vector<std::uint64_t>& elements() const;  // Finite / Cofinite (excluded)
  std::uint64_t first() const;                          // Progression
  std::uint64_t step() const;                           // Progression
  std::uint64_t base() const;                           // PowersOf
  const WitnessIntervals& witness() const;              // BlockUnion
  const BlockSelector& selector() const;                // BlockUnion
  const Bits& bits() const;                             // Bitmap
  std::uint64_t horizon() const;                        // Bitmap
  const NatSet& left() const;                           // Union / Intersection / Complement
  const NatSet& right() const;                          // Union / Intersection

  Tri member(std::uint64_t n) const;
  // Membership of 1..N; throws HorizonExceeded where membership is unknown.
  Bits prefix(std::uint64_t N) const;
  std::uint64_t count_up_to(std::uint64_t N) const;
  // Smallest member m with from <= m <= limit, nullopt when there is none.
  // Throws HorizonExceeded when membership in the range is unknown.
  std::optional<std::uint64_t> next_member(std::uint64_t from, std::uint64_t limit) const;
  Tri is_infinite() const;
  // Largest n such that membership of every m <= n is decided (UINT64_MAX if all).
  std::uint64_t decidable_limit() const;

  // Exact eventually-periodic form, when the tree admits one.
  std::optional<PeriodicForm> periodic_form() const;
  // Periodic form of s up to a "sparse" set: powers leaves are treated as empty,
  // so s differs from the form by finitely many elements plus a subset of
  // finitely many sets {b^k}.
  std::optional<PeriodicForm> periodic_form_mod_sparse() const;
  // s is contained in a finite union of finite sets and power sets.
  bool is_sparse() const;

  nlohmann::json to_json() const;
  static NatSet from_json(const nlohmann::json& j);
  std::string describe() const;

  friend bool operator==(const NatSet& a, const NatSet& b);

 private:
  explicit NatSet(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::Node> node_;
  friend struct detail::Node;
};

// nu_2(n): exponent of 2 in n (n >= 1).
inline unsigned two_adic_valuation(std::uint64_t n) { return static_cast<unsigned>(__builtin_ctzll(n)); }

}  // namespace idealconv
