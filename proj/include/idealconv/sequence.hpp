#pragma once

// Bounded sequences in Q^d and their hit sets.

#include "idealconv/natset.hpp"
#include "idealconv/rational.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace idealconv {

using Point = std::vector<Frac>;

std::string to_string(const Point& p);
nlohmann::json point_to_json(const Point& p);

// Sup-norm ball |y - c| < r, or the half-open cell c - r <= y < c + r.
struct Region {
  Point center;
  Frac radius;
  bool cell = false;

  bool contains(const Point& y) const;
};

struct FiniteAlphabet {
  std::vector<Point> letters;
  std::vector<NatSet> index_sets;  // index_sets[j] = {n : x_n = letters[j]}
};

// Exact {n : x_n in region} when the generator admits one.
using IndicatorHook = std::function<std::optional<NatSet>(const Region&)>;

class SequenceSpec {
 public:
  using Generator = std::function<Point(std::uint64_t)>;

  SequenceSpec(std::string name, std::size_t dim, Frac bound, Generator gen, IndicatorHook hook = {});
  static SequenceSpec from_alphabet(std::string name, FiniteAlphabet alphabet);

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  const Frac& bound() const { return bound_; }
  const std::optional<FiniteAlphabet>& alphabet() const { return alphabet_; }
  const IndicatorHook& hook() const { return hook_; }

  Point at(std::uint64_t n) const;
  // Coordinates of x_1..x_N, row-major.
  std::vector<Frac> materialize(std::uint64_t N) const;
  // Largest n for which the generator is defined (UINT64_MAX when total).
  std::uint64_t defined_to() const { return defined_to_; }
  SequenceSpec with_defined_to(std::uint64_t n) const;

  // Checks disjointness/cover of alphabet index sets and the bound on [1, N].
  void validate(std::uint64_t N) const;

 private:
  std::string name_;
  std::size_t dim_ = 1;
  Frac bound_{1};
  Generator gen_;
  IndicatorHook hook_;
  std::optional<FiniteAlphabet> alphabet_;
  std::uint64_t defined_to_ = std::numeric_limits<std::uint64_t>::max();
};

// char:evens, char:odds, char:powers2, harmonic, rationals, cycle:<k>, alphabet:<json>.
SequenceSpec sequence_from_name(const std::string& spec);
std::vector<std::string> zoo_names();

// The n-th term of 0, 1, 1/2, 1/3, 2/3, 1/4, 3/4, ... (reduced fractions by denominator).
Frac rational_enumeration(std::uint64_t n);

// {n : x_n in region}: symbolic for alphabets and hooked generators, a prefix
// bitmap of length `horizon` otherwise.
NatSet indicator_set(const SequenceSpec& x, const Region& region, std::uint64_t horizon);
// Same, reusing already materialized coordinates for the bitmap case.
NatSet indicator_set(const SequenceSpec& x, const Region& region, std::uint64_t horizon,
                     const std::vector<Frac>& coords, bool serial = false);

}  // namespace idealconv
