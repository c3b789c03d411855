#include "idealconv/sequence.hpp"

#include "idealconv/error.hpp"
#include "idealconv/json_io.hpp"
#include "idealconv/kernels.hpp"

#include <mutex>
#include <numeric>

namespace idealconv {

std::string to_string(const Point& p) {
  if (p.size() == 1) return p[0].str();
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + p[i].str();
  return s + ")";
}

nlohmann::json point_to_json(const Point& p) {
  auto j = nlohmann::json::array();
  for (const auto& c : p) j.push_back(c.str());
  return j;
}

bool Region::contains(const Point& y) const {
  for (std::size_t i = 0; i < center.size(); ++i) {
    if (cell ? !within_cell(y[i], center[i], radius) : !within_open(y[i], center[i], radius)) return false;
  }
  return true;
}

SequenceSpec::SequenceSpec(std::string name, std::size_t dim, Frac bound, Generator gen, IndicatorHook hook)
    : name_(std::move(name)), dim_(dim), bound_(bound), gen_(std::move(gen)), hook_(std::move(hook)) {
  if (dim_ < 1) throw Error(ErrorCode::InvalidArgument, "sequence dimension must be >= 1");
}

SequenceSpec SequenceSpec::from_alphabet(std::string name, FiniteAlphabet a) {
  if (a.letters.empty() || a.letters.size() != a.index_sets.size())
    throw Error(ErrorCode::InvalidArgument, "alphabet needs one index set per letter");
  const std::size_t dim = a.letters[0].size();
  Frac bound{0};
  for (const auto& l : a.letters) {
    if (l.size() != dim) throw Error(ErrorCode::InvalidArgument, "alphabet letters must share a dimension");
    for (const auto& c : l) bound = std::max(bound, c.num < 0 ? Frac(-c.num, c.den) : c);
  }
  auto shared = std::make_shared<FiniteAlphabet>(a);
  auto gen = [shared](std::uint64_t n) -> Point {
    for (std::size_t j = 0; j < shared->letters.size(); ++j) {
      const Tri t = shared->index_sets[j].member(n);
      if (t == Tri::True) return shared->letters[j];
      if (t == Tri::Unknown) throw Error(ErrorCode::HorizonExceeded, "alphabet index set undecided at " + std::to_string(n));
    }
    throw Error(ErrorCode::InvalidArgument, "alphabet index sets do not cover " + std::to_string(n));
  };
  auto hook = [shared](const Region& r) -> std::optional<NatSet> {
    std::optional<NatSet> acc;
    std::size_t hits = 0;
    for (std::size_t j = 0; j < shared->letters.size(); ++j) {
      if (!r.contains(shared->letters[j])) continue;
      ++hits;
      acc = acc ? NatSet::set_union(*acc, shared->index_sets[j]) : shared->index_sets[j];
    }
    if (!acc) return NatSet::empty();
    if (hits == shared->letters.size()) return NatSet::all();  // the index sets partition N
    return acc;
  };
  SequenceSpec s(std::move(name), dim, bound, gen, hook);
  s.alphabet_ = std::move(a);
  std::uint64_t lim = std::numeric_limits<std::uint64_t>::max();
  for (const auto& ix : s.alphabet_->index_sets) lim = std::min(lim, ix.decidable_limit());
  s.defined_to_ = lim;
  return s;
}

Point SequenceSpec::at(std::uint64_t n) const {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "sequences are indexed from 1");
  if (n > defined_to_) throw Error(ErrorCode::HorizonExceeded, name_ + " is defined only up to " + std::to_string(defined_to_));
  return gen_(n);
}

std::vector<Frac> SequenceSpec::materialize(std::uint64_t N) const {
  if (N > defined_to_) throw Error(ErrorCode::HorizonExceeded, name_ + " is defined only up to " + std::to_string(defined_to_));
  std::vector<Frac> out(N * dim_);
  std::vector<std::string> errors(1);
  bool failed = false;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(N); ++i) {
    try {
      const Point p = gen_(static_cast<std::uint64_t>(i) + 1);
      for (std::size_t c = 0; c < dim_; ++c) out[static_cast<std::size_t>(i) * dim_ + c] = p[c];
    } catch (const std::exception& e) {
#pragma omp critical
      {
        failed = true;
        errors[0] = e.what();
      }
    }
  }
  if (failed) throw Error(ErrorCode::HorizonExceeded, errors[0]);
  return out;
}

SequenceSpec SequenceSpec::with_defined_to(std::uint64_t n) const {
  SequenceSpec s = *this;
  s.defined_to_ = std::min(defined_to_, n);
  return s;
}

void SequenceSpec::validate(std::uint64_t N) const {
  if (alphabet_) {
    std::vector<std::uint8_t> seen(N, 0);
    for (const auto& ix : alphabet_->index_sets) {
      const Bits b = ix.prefix(N);
      for (std::uint64_t i = 0; i < N; ++i) {
        if (b[i] && seen[i]) throw Error(ErrorCode::InvalidArgument, "alphabet index sets overlap at " + std::to_string(i + 1));
        seen[i] |= b[i];
      }
    }
    for (std::uint64_t i = 0; i < N; ++i)
      if (!seen[i]) throw Error(ErrorCode::InvalidArgument, "alphabet index sets miss " + std::to_string(i + 1));
  }
  const auto coords = materialize(N);
  const Frac nb(-bound_.num, bound_.den);
  for (const auto& c : coords)
    if (c < nb || bound_ < c) throw Error(ErrorCode::InvalidArgument, name_ + " leaves its declared bound");
}

// ---------------------------------------------------------------- zoo

Frac rational_enumeration(std::uint64_t n) {
  static std::mutex mu;
  static std::vector<Frac> table{Frac(0), Frac(1)};
  static std::int64_t next_den = 2;
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "sequences are indexed from 1");
  std::lock_guard<std::mutex> lock(mu);
  while (table.size() < n) {
    for (std::int64_t p = 1; p < next_den; ++p)
      if (std::gcd(p, next_den) == 1) table.emplace_back(p, next_den);
    ++next_den;
  }
  return table[n - 1];
}

namespace {

// {n >= 1 : 1/n in region}, for 1-dimensional regions.
NatSet harmonic_indicator(const Region& r) {
  const Rational c = r.center[0].exact();
  const Rational rad = r.radius.exact();
  const Rational lo = c - rad;
  const Rational hi = c + rad;
  // 1/n < hi
  if (hi <= 0) return NatSet::empty();
  const Rational inv_h = Rational(1) / hi;
  const BigInt inv_hi = boost::multiprecision::numerator(inv_h) / boost::multiprecision::denominator(inv_h);
  const BigInt nmin = inv_hi + 1;
  // 1/n > lo (ball) or 1/n >= lo (cell)
  std::optional<BigInt> nmax;
  if (lo > 0) {
    const Rational inv = Rational(1) / lo;
    BigInt fl = boost::multiprecision::numerator(inv) / boost::multiprecision::denominator(inv);
    if (!r.cell && Rational(fl) == inv) fl -= 1;
    nmax = fl;
  } else if (lo == 0 && r.cell) {
    nmax.reset();
  }
  const BigInt limit = BigInt(1) << 62;
  if (nmin > limit) return NatSet::empty();
  const std::uint64_t a = nmin.convert_to<std::uint64_t>();
  if (!nmax) return a == 1 ? NatSet::all() : NatSet::progression(a, 1);
  if (*nmax < nmin) return NatSet::empty();
  const std::uint64_t b = *nmax > limit ? limit.convert_to<std::uint64_t>() : nmax->convert_to<std::uint64_t>();
  if (b - a < 4096) return NatSet::interval(a, b);
  return NatSet::set_intersection(NatSet::progression(a, 1), NatSet::complement(NatSet::progression(b + 1, 1)));
}

Point scalar(const Frac& f) { return Point{f}; }

FiniteAlphabet char_alphabet(const NatSet& ones) {
  return FiniteAlphabet{{scalar(Frac(0)), scalar(Frac(1))}, {NatSet::complement(ones), ones}};
}

Point parse_point(const nlohmann::json& j) {
  Point p;
  auto one = [](const nlohmann::json& v) {
    if (v.is_string()) return parse_frac(v.get<std::string>());
    if (v.is_number_integer()) return Frac(v.get<std::int64_t>());
    throw Error(ErrorCode::InvalidArgument, "letter coordinates must be integers or \"p/q\" strings");
  };
  if (j.is_array()) {
    for (const auto& v : j) p.push_back(one(v));
  } else {
    p.push_back(one(j));
  }
  return p;
}

}  // namespace

SequenceSpec sequence_from_name(const std::string& spec) {
  if (spec == "char:evens") {
    FiniteAlphabet a{{scalar(Frac(0)), scalar(Frac(1))}, {NatSet::progression(1, 2), NatSet::progression(2, 2)}};
    return SequenceSpec::from_alphabet(spec, a);
  }
  if (spec == "char:odds") {
    FiniteAlphabet a{{scalar(Frac(0)), scalar(Frac(1))}, {NatSet::progression(2, 2), NatSet::progression(1, 2)}};
    return SequenceSpec::from_alphabet(spec, a);
  }
  if (spec == "char:powers2") return SequenceSpec::from_alphabet(spec, char_alphabet(NatSet::powers_of(2)));
  if (spec == "harmonic") {
    return SequenceSpec(
        spec, 1, Frac(1), [](std::uint64_t n) { return scalar(Frac(1, static_cast<std::int64_t>(n))); },
        [](const Region& r) -> std::optional<NatSet> { return harmonic_indicator(r); });
  }
  if (spec == "rationals") {
    return SequenceSpec(spec, 1, Frac(1), [](std::uint64_t n) { return scalar(rational_enumeration(n)); });
  }
  if (spec.rfind("cycle:", 0) == 0) {
    const std::uint64_t k = std::stoull(spec.substr(6));
    if (k < 1 || k > 4096) throw Error(ErrorCode::InvalidArgument, "cycle length must lie in [1, 4096]");
    FiniteAlphabet a;
    for (std::uint64_t j = 0; j < k; ++j) {
      a.letters.push_back(scalar(Frac(static_cast<std::int64_t>(j), static_cast<std::int64_t>(k))));
      a.index_sets.push_back(k == 1 ? NatSet::all() : NatSet::progression(j == 0 ? k : j, k));
    }
    return SequenceSpec::from_alphabet(spec, a);
  }
  if (spec.rfind("alphabet:", 0) == 0) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(spec.substr(9));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidArgument, std::string("alphabet JSON: ") + e.what());
    }
    FiniteAlphabet a;
    for (const auto& l : j.at("letters")) a.letters.push_back(parse_point(l));
    for (const auto& s : j.at("sets")) a.index_sets.push_back(NatSet::from_json(s));
    return SequenceSpec::from_alphabet(spec, a);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown sequence: " + spec);
}

std::vector<std::string> zoo_names() {
  return {"char:evens", "char:odds", "char:powers2", "harmonic", "rationals", "cycle:<k>", "alphabet:<json>"};
}

NatSet indicator_set(const SequenceSpec& x, const Region& region, std::uint64_t horizon) {
  if (x.hook()) {
    if (auto s = x.hook()(region)) return *s;
  }
  return indicator_set(x, region, horizon, x.materialize(horizon));
}

NatSet indicator_set(const SequenceSpec& x, const Region& region, std::uint64_t horizon,
                     const std::vector<Frac>& coords, bool serial) {
  if (region.radius.num <= 0) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
  if (x.hook()) {
    if (auto s = x.hook()(region)) return *s;
  }
  PointBlock pts{x.dim(), std::span<const Frac>(coords.data(), std::min<std::size_t>(coords.size(), horizon * x.dim()))};
  if (region.cell) {
    return NatSet::bitmap(serial ? kernels::serial::cell_hits(pts, region.center, region.radius)
                                 : kernels::cell_hits(pts, region.center, region.radius));
  }
  return NatSet::bitmap(serial ? kernels::serial::ball_hits(pts, region.center, region.radius)
                               : kernels::ball_hits(pts, region.center, region.radius));
}

}  // namespace idealconv
