#include "idealconv/transforms.hpp"

#include "idealconv/error.hpp"
#include "idealconv/rng.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace idealconv {

namespace {

constexpr std::uint64_t kNoLimit = std::numeric_limits<std::uint64_t>::max();
constexpr std::uint64_t kBig = std::uint64_t{1} << 62;

using i128 = __int128;

i128 floor_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

i128 ceil_div(i128 a, i128 b) { return -floor_div(-a, b); }

i128 mod_pos(i128 a, i128 m) {
  i128 r = a % m;
  return r < 0 ? r + m : r;
}

// Inverse of a modulo m (gcd(a, m) = 1, m >= 1).
i128 mod_inverse(i128 a, i128 m) {
  if (m == 1) return 0;
  i128 g = m, x = 0, x1 = 1, a1 = mod_pos(a, m);
  while (a1 != 0) {
    const i128 q = g / a1;
    std::tie(g, a1) = std::make_tuple(a1, g - q * a1);
    std::tie(x, x1) = std::make_tuple(x1, x - q * x1);
  }
  return mod_pos(x, m);
}

NatSet progression_from(i128 first, i128 step) {
  if (first < 1) first += ((1 - first + step - 1) / step) * step;
  if (first > static_cast<i128>(kBig) || step > static_cast<i128>(kBig)) return NatSet::empty();
  return NatSet::progression(static_cast<std::uint64_t>(first), static_cast<std::uint64_t>(step));
}

// {n : b + t n in s}, meaningful where b + t n >= 1.
std::optional<NatSet> affine_preimage(const NatSet& s, std::int64_t b, std::uint64_t t) {
  if (b == 0 && t == 1) return s;
  switch (s.kind()) {
    case SetKind::Finite:
    case SetKind::Cofinite: {
      std::vector<std::uint64_t> pre;
      for (auto f : s.elements()) {
        const i128 diff = static_cast<i128>(f) - b;
        if (diff > 0 && diff % t == 0) pre.push_back(static_cast<std::uint64_t>(diff / t));
      }
      NatSet fin = NatSet::finite(pre);
      return s.kind() == SetKind::Finite ? fin : NatSet::complement(fin);
    }
    case SetKind::Progression: {
      const i128 a = s.first(), d = s.step();
      const i128 g = std::gcd(static_cast<std::uint64_t>(t), s.step());
      const i128 r = mod_pos(a - b, d);
      if (r % g != 0) return NatSet::empty();
      const i128 dd = d / g, tt = static_cast<i128>(t) / g, rr = r / g;
      const i128 n0 = mod_pos(rr * mod_inverse(tt, dd), dd);
      i128 lower = std::max<i128>(1, ceil_div(a - b, static_cast<i128>(t)));
      const i128 first = lower + mod_pos(n0 - lower, dd);
      return progression_from(first, dd);
    }
    case SetKind::PowersOf: {
      if (b != 0) return std::nullopt;
      std::uint64_t p = 1;
      unsigned j = 0;
      while (p < t) {
        if (p > kBig / s.base()) return std::nullopt;
        p *= s.base();
        ++j;
      }
      if (p != t) return std::nullopt;
      if (j == 0) return s;
      // b^k = b^j n  <=>  n = b^(k-j), and every n = b^i, i >= 0, arises.
      return NatSet::set_union(NatSet::finite({1}), s);
    }
    case SetKind::Union: {
      auto l = affine_preimage(s.left(), b, t);
      auto r = affine_preimage(s.right(), b, t);
      if (!l || !r) return std::nullopt;
      return NatSet::set_union(*l, *r);
    }
    case SetKind::Intersection: {
      auto l = affine_preimage(s.left(), b, t);
      auto r = affine_preimage(s.right(), b, t);
      if (!l || !r) return std::nullopt;
      return NatSet::set_intersection(*l, *r);
    }
    case SetKind::Complement: {
      auto l = affine_preimage(s.left(), b, t);
      if (!l) return std::nullopt;
      return NatSet::complement(*l);
    }
    default: return std::nullopt;
  }
}

std::optional<NatSet> finite_hits(const std::vector<std::uint64_t>& positions_values, const NatSet& s,
                                  std::uint64_t offset_index) {
  std::vector<std::uint64_t> hits;
  for (std::size_t i = 0; i < positions_values.size(); ++i) {
    const Tri t = s.member(positions_values[i]);
    if (t == Tri::Unknown) return std::nullopt;
    if (t == Tri::True) hits.push_back(i + offset_index);
  }
  return NatSet::finite(std::move(hits));
}

bool is_empty_leaf(const NatSet& s) { return s.kind() == SetKind::Finite && s.elements().empty(); }
bool is_full_leaf(const NatSet& s) { return s.kind() == SetKind::Cofinite && s.elements().empty(); }

std::optional<NatSet> symbolic_preimage(const SubsequenceMap& sigma, const NatSet& s) {
  if (sigma.is_identity()) return s;
  const std::uint64_t m = sigma.table.size();
  if (sigma.tail == TailKind::Unfinished) {
    Bits bits(m, 0);
    for (std::uint64_t n = 1; n <= m; ++n) {
      const Tri t = s.member(sigma.table[n - 1]);
      if (t == Tri::Unknown) return std::nullopt;
      bits[n - 1] = t == Tri::True;
    }
    return NatSet::bitmap(std::move(bits));
  }
  std::int64_t b = 0;
  std::uint64_t t = 1;
  if (sigma.tail == TailKind::IdentityShift) {
    b = sigma.param;
  } else {
    const std::int64_t last = m ? static_cast<std::int64_t>(sigma.table.back()) : 0;
    t = static_cast<std::uint64_t>(sigma.param);
    b = last - static_cast<std::int64_t>(m) * sigma.param;
  }
  auto tail = affine_preimage(s, b, t);
  if (!tail) return std::nullopt;
  if (m == 0) return simplify(*tail);
  auto head = finite_hits(sigma.table, s, 1);
  if (!head) return std::nullopt;
  return simplify(NatSet::set_union(*head, NatSet::set_intersection(*tail, NatSet::progression(m + 1, 1))));
}

std::optional<NatSet> symbolic_preimage(const PermutationMap& pi, const NatSet& s) {
  if (pi.rule == PermRule::SwapOddEven) {
    auto odd = affine_preimage(s, 1, 1);
    auto even = affine_preimage(s, -1, 1);
    if (!odd || !even) return std::nullopt;
    return simplify(NatSet::set_union(NatSet::set_intersection(NatSet::progression(1, 2), *odd),
                                      NatSet::set_intersection(NatSet::progression(2, 2), *even)));
  }
  const std::uint64_t m = pi.head.size();
  auto head = finite_hits(pi.head, s, 1);
  if (!head) return std::nullopt;
  std::vector<std::uint64_t> hits = head->elements();
  std::vector<std::uint64_t> keys;
  for (const auto& [k, v] : pi.far) {
    keys.push_back(k);
    const Tri t = s.member(v);
    if (t == Tri::Unknown) return std::nullopt;
    if (t == Tri::True) hits.push_back(k);
  }
  if (m == 0 && keys.empty()) return s;
  NatSet rest = NatSet::set_intersection(s, NatSet::progression(m + 1, 1));
  if (!keys.empty()) rest = NatSet::set_intersection(rest, NatSet::complement(NatSet::finite(keys)));
  return simplify(NatSet::set_union(NatSet::finite(hits), rest));
}

std::uint64_t composed_limit(const SubsequenceMap& sigma, std::uint64_t x_limit) {
  std::uint64_t lim = sigma.valid_to();
  if (x_limit == kNoLimit) return lim;
  // largest n with sigma(n) <= x_limit
  std::uint64_t lo = 0, hi = std::min<std::uint64_t>(lim, x_limit);
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo + 1) / 2;
    if (sigma.value(mid) <= x_limit) lo = mid;
    else hi = mid - 1;
  }
  return lo;
}

}  // namespace

std::string to_string(TailKind k) {
  switch (k) {
    case TailKind::IdentityShift: return "identity-shift";
    case TailKind::ArithmeticTail: return "arithmetic";
    case TailKind::Unfinished: return "unfinished";
  }
  return "?";
}

// ---------------------------------------------------------------- sigma

std::uint64_t SubsequenceMap::valid_to() const { return tail == TailKind::Unfinished ? table.size() : kNoLimit; }

std::optional<std::uint64_t> SubsequenceMap::at(std::uint64_t n) const {
  if (n == 0) return std::nullopt;
  const std::uint64_t m = table.size();
  if (n <= m) return table[n - 1];
  switch (tail) {
    case TailKind::Unfinished: return std::nullopt;
    case TailKind::IdentityShift: {
      const i128 v = static_cast<i128>(n) + param;
      if (v < 1 || v > static_cast<i128>(kBig)) return std::nullopt;
      return static_cast<std::uint64_t>(v);
    }
    case TailKind::ArithmeticTail: {
      const i128 last = m ? table.back() : 0;
      const i128 v = last + static_cast<i128>(n - m) * param;
      if (v < 1 || v > static_cast<i128>(kBig)) return std::nullopt;
      return static_cast<std::uint64_t>(v);
    }
  }
  return std::nullopt;
}

std::uint64_t SubsequenceMap::value(std::uint64_t n) const {
  const auto v = at(n);
  if (!v) throw Error(ErrorCode::HorizonExceeded, "subsequence map undefined at " + std::to_string(n));
  return *v;
}

void SubsequenceMap::validate() const {
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i] < 1 || (i > 0 && table[i] <= table[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "subsequence table must be strictly increasing positive integers");
  }
  if (tail == TailKind::ArithmeticTail && param < 1)
    throw Error(ErrorCode::InvalidArgument, "arithmetic tail needs step >= 1");
  if (tail == TailKind::IdentityShift) {
    const auto v = at(table.size() + 1);
    if (!v || (!table.empty() && *v <= table.back()))
      throw Error(ErrorCode::InvalidArgument, "identity-shift tail breaks monotonicity at the seam");
  }
}

nlohmann::json SubsequenceMap::to_json() const {
  nlohmann::json j{{"table", table}, {"tail", {{"kind", to_string(tail)}, {"param", param}}}};
  if (tail == TailKind::Unfinished) j["horizon"] = table.size();
  else j["horizon"] = nullptr;
  return j;
}

SubsequenceMap SubsequenceMap::from_json(const nlohmann::json& j) {
  SubsequenceMap s;
  try {
    s.table = j.at("table").get<std::vector<std::uint64_t>>();
    const auto kind = j.at("tail").at("kind").get<std::string>();
    s.param = j.at("tail").value("param", std::int64_t{0});
    if (kind == "identity-shift") s.tail = TailKind::IdentityShift;
    else if (kind == "arithmetic") s.tail = TailKind::ArithmeticTail;
    else if (kind == "unfinished") s.tail = TailKind::Unfinished;
    else throw Error(ErrorCode::InvalidArgument, "unknown tail kind: " + kind);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed map JSON: ") + e.what());
  }
  s.validate();
  return s;
}

// ---------------------------------------------------------------- pi

PermutationMap PermutationMap::close_out(std::vector<std::uint64_t> head, std::uint64_t pair_limit) {
  const std::uint64_t m = head.size();
  std::set<std::uint64_t> seen;
  std::vector<std::uint64_t> above;
  std::vector<std::uint8_t> used(m + 1, 0);
  for (auto v : head) {
    if (v < 1 || !seen.insert(v).second) throw Error(ErrorCode::InvalidArgument, "permutation head is not injective");
    if (v > m) above.push_back(v);
    else used[v] = 1;
  }
  if (above.size() > pair_limit)
    throw Error(ErrorCode::BijectivityOverflow, std::to_string(above.size()) + " displaced integers exceed the pair limit");
  std::sort(above.begin(), above.end());
  PermutationMap p;
  p.head = std::move(head);
  std::size_t j = 0;
  for (std::uint64_t u = 1; u <= m && j < above.size(); ++u) {
    if (!used[u]) p.far.emplace(above[j++], u);
  }
  return p;
}

std::uint64_t PermutationMap::value(std::uint64_t n) const {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "permutations act on n >= 1");
  if (rule == PermRule::SwapOddEven) return n % 2 ? n + 1 : n - 1;
  if (n <= head.size()) return head[n - 1];
  if (const auto it = far.find(n); it != far.end()) return it->second;
  return n;
}

std::uint64_t PermutationMap::support_end() const {
  if (rule == PermRule::SwapOddEven) return 0;
  std::uint64_t e = head.size();
  if (!far.empty()) e = std::max(e, far.rbegin()->first);
  return e;
}

bool PermutationMap::audit_bijective(std::uint64_t upto) const {
  if (rule == PermRule::SwapOddEven) {
    if (upto % 2) ++upto;
    std::vector<std::uint8_t> hit(upto + 1, 0);
    for (std::uint64_t n = 1; n <= upto; ++n) {
      const std::uint64_t v = value(n);
      if (v < 1 || v > upto || hit[v]) return false;
      hit[v] = 1;
    }
    return true;
  }
  // Off the moved set D = [1, m] ∪ {far keys > m} the map is the identity, so
  // it is a bijection iff it maps D injectively into D.
  const std::uint64_t m = head.size();
  auto in_d = [&](std::uint64_t v) { return v >= 1 && (v <= m || far.count(v) > 0); };
  std::vector<std::uint64_t> image;
  image.reserve(m + far.size());
  for (auto v : head) {
    if (!in_d(v)) return false;
    image.push_back(v);
  }
  for (const auto& [k, v] : far) {
    if (k <= m) continue;
    if (!in_d(v)) return false;
    image.push_back(v);
  }
  std::sort(image.begin(), image.end());
  return std::adjacent_find(image.begin(), image.end()) == image.end();
}

nlohmann::json PermutationMap::to_json() const {
  auto far_json = nlohmann::json::array();
  for (const auto& [k, v] : far) far_json.push_back({k, v});
  return nlohmann::json{{"table", head},
                        {"tail", {{"kind", rule == PermRule::SwapOddEven ? "swap-odd-even" : "identity"}, {"param", 0}}},
                        {"far", far_json},
                        {"horizon", support_end()}};
}

PermutationMap PermutationMap::from_json(const nlohmann::json& j) {
  PermutationMap p;
  try {
    const auto kind = j.at("tail").at("kind").get<std::string>();
    if (kind == "swap-odd-even") return swap_odd_even();
    if (kind != "identity") throw Error(ErrorCode::InvalidArgument, "unknown permutation tail: " + kind);
    p.head = j.at("table").get<std::vector<std::uint64_t>>();
    for (const auto& kv : j.value("far", nlohmann::json::array()))
      p.far.emplace(kv.at(0).get<std::uint64_t>(), kv.at(1).get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed permutation JSON: ") + e.what());
  }
  if (!p.audit_bijective(p.support_end())) throw Error(ErrorCode::InvalidArgument, "permutation JSON is not a bijection");
  return p;
}

// ---------------------------------------------------------------- action

SequenceSpec apply(const SubsequenceMap& sigma, const SequenceSpec& x) {
  sigma.validate();
  const std::string name = "sigma(" + x.name() + ")";
  if (x.alphabet()) {
    FiniteAlphabet a = *x.alphabet();
    bool ok = true;
    for (auto& ix : a.index_sets) {
      auto p = symbolic_preimage(sigma, ix);
      if (!p) {
        ok = false;
        break;
      }
      ix = *p;
    }
    if (ok) return SequenceSpec::from_alphabet(name, std::move(a));
  }
  auto gen = [sigma, x](std::uint64_t n) { return x.at(sigma.value(n)); };
  IndicatorHook hook;
  if (x.hook()) {
    hook = [sigma, x](const Region& r) -> std::optional<NatSet> {
      auto s = x.hook()(r);
      if (!s) return std::nullopt;
      return symbolic_preimage(sigma, *s);
    };
  }
  SequenceSpec y(name, x.dim(), x.bound(), gen, hook);
  return y.with_defined_to(composed_limit(sigma, x.defined_to()));
}

SequenceSpec apply(const PermutationMap& pi, const SequenceSpec& x) {
  const std::string name = "pi(" + x.name() + ")";
  if (x.alphabet()) {
    FiniteAlphabet a = *x.alphabet();
    bool ok = true;
    for (auto& ix : a.index_sets) {
      auto p = symbolic_preimage(pi, ix);
      if (!p) {
        ok = false;
        break;
      }
      ix = *p;
    }
    if (ok) return SequenceSpec::from_alphabet(name, std::move(a));
  }
  auto gen = [pi, x](std::uint64_t n) { return x.at(pi.value(n)); };
  IndicatorHook hook;
  if (x.hook()) {
    hook = [pi, x](const Region& r) -> std::optional<NatSet> {
      auto s = x.hook()(r);
      if (!s) return std::nullopt;
      return symbolic_preimage(pi, *s);
    };
  }
  SequenceSpec y(name, x.dim(), x.bound(), gen, hook);
  if (x.defined_to() != kNoLimit) {
    // Only the prefix whose images stay inside x's domain is defined.
    std::uint64_t lim = 0;
    while (lim < x.defined_to() && pi.value(lim + 1) <= x.defined_to()) ++lim;
    y = y.with_defined_to(lim);
  }
  return y;
}

NatSet preimage(const SubsequenceMap& sigma, const NatSet& s, std::uint64_t horizon) {
  if (auto p = symbolic_preimage(sigma, s)) return *p;
  const std::uint64_t N = std::min(horizon, sigma.valid_to());
  Bits bits(N, 0);
  for (std::uint64_t n = 1; n <= N; ++n) {
    const Tri t = s.member(sigma.value(n));
    if (t == Tri::Unknown) throw Error(ErrorCode::HorizonExceeded, "preimage needs membership beyond the set's horizon");
    bits[n - 1] = t == Tri::True;
  }
  return NatSet::bitmap(std::move(bits));
}

NatSet preimage(const PermutationMap& pi, const NatSet& s, std::uint64_t horizon) {
  if (auto p = symbolic_preimage(pi, s)) return *p;
  Bits bits(horizon, 0);
  for (std::uint64_t n = 1; n <= horizon; ++n) {
    const Tri t = s.member(pi.value(n));
    if (t == Tri::Unknown) throw Error(ErrorCode::HorizonExceeded, "preimage needs membership beyond the set's horizon");
    bits[n - 1] = t == Tri::True;
  }
  return NatSet::bitmap(std::move(bits));
}

// ---------------------------------------------------------------- simplify

NatSet simplify(const NatSet& s) {
  switch (s.kind()) {
    case SetKind::Progression:
      if (s.step() == 1 && s.first() <= 4097) {
        std::vector<std::uint64_t> ex;
        for (std::uint64_t i = 1; i < s.first(); ++i) ex.push_back(i);
        return NatSet::cofinite(ex);
      }
      return s;
    case SetKind::Complement: {
      const NatSet in = simplify(s.left());
      if (in.kind() == SetKind::Complement) return in.left();
      if (in.kind() == SetKind::Finite) return NatSet::cofinite(in.elements());
      if (in.kind() == SetKind::Cofinite) return NatSet::finite(in.elements());
      return NatSet::complement(in);
    }
    case SetKind::Union: {
      const NatSet l = simplify(s.left());
      const NatSet r = simplify(s.right());
      if (is_empty_leaf(l)) return r;
      if (is_empty_leaf(r)) return l;
      if (is_full_leaf(l) || is_full_leaf(r)) return NatSet::all();
      if (l.kind() == SetKind::Finite && r.kind() == SetKind::Finite) {
        auto v = l.elements();
        v.insert(v.end(), r.elements().begin(), r.elements().end());
        return NatSet::finite(v);
      }
      if (l.kind() == SetKind::Cofinite && r.kind() == SetKind::Cofinite) {
        std::vector<std::uint64_t> v;
        std::set_intersection(l.elements().begin(), l.elements().end(), r.elements().begin(), r.elements().end(),
                              std::back_inserter(v));
        return NatSet::cofinite(v);
      }
      if (l.kind() == SetKind::Finite || r.kind() == SetKind::Finite) {
        const NatSet& f = l.kind() == SetKind::Finite ? l : r;
        const NatSet& o = l.kind() == SetKind::Finite ? r : l;
        if (o.kind() == SetKind::Cofinite) {
          std::vector<std::uint64_t> v;
          for (auto e : o.elements())
            if (f.member(e) != Tri::True) v.push_back(e);
          return NatSet::cofinite(v);
        }
      }
      return NatSet::set_union(l, r);
    }
    case SetKind::Intersection: {
      const NatSet l = simplify(s.left());
      const NatSet r = simplify(s.right());
      if (is_empty_leaf(l) || is_empty_leaf(r)) return NatSet::empty();
      if (is_full_leaf(l)) return r;
      if (is_full_leaf(r)) return l;
      if (l.kind() == SetKind::Finite || r.kind() == SetKind::Finite) {
        const NatSet& f = l.kind() == SetKind::Finite ? l : r;
        const NatSet& o = l.kind() == SetKind::Finite ? r : l;
        std::vector<std::uint64_t> v;
        bool decided = true;
        for (auto e : f.elements()) {
          const Tri t = o.member(e);
          if (t == Tri::Unknown) decided = false;
          if (t == Tri::True) v.push_back(e);
        }
        if (decided) return NatSet::finite(v);
      }
      if (l.kind() == SetKind::Cofinite && r.kind() == SetKind::Cofinite) {
        auto v = l.elements();
        v.insert(v.end(), r.elements().begin(), r.elements().end());
        return NatSet::cofinite(v);
      }
      if (l.kind() == SetKind::Progression && r.kind() == SetKind::Progression) {
        const i128 a1 = l.first(), d1 = l.step(), a2 = r.first(), d2 = r.step();
        const i128 g = std::gcd(l.step(), r.step());
        if (mod_pos(a2 - a1, g) != 0) return NatSet::empty();
        const i128 lcm = d1 / g * d2;
        if (lcm <= static_cast<i128>(kBig)) {
          const i128 m2 = d2 / g;
          const i128 k = mod_pos(((a2 - a1) / g) * mod_inverse(d1 / g, m2), m2);
          i128 n0 = a1 + d1 * k;
          const i128 lower = std::max(a1, a2);
          if (n0 < lower) n0 += ceil_div(lower - n0, lcm) * lcm;
          return simplify(progression_from(n0, lcm));
        }
      }
      if ((l.kind() == SetKind::Cofinite && r.kind() == SetKind::Progression) ||
          (r.kind() == SetKind::Cofinite && l.kind() == SetKind::Progression)) {
        const NatSet& c = l.kind() == SetKind::Cofinite ? l : r;
        const NatSet& p = l.kind() == SetKind::Cofinite ? r : l;
        std::vector<std::uint64_t> ex;
        for (auto e : c.elements())
          if (p.member(e) == Tri::True) ex.push_back(e);
        if (ex.empty()) return p;
        return NatSet::set_intersection(p, NatSet::cofinite(ex));
      }
      return NatSet::set_intersection(l, r);
    }
    default: return s;
  }
}

// ---------------------------------------------------------------- random maps

SubsequenceMap random_sigma(std::uint64_t seed, const GapSpec& gaps, std::uint64_t length) {
  Rng rng(seed);
  SubsequenceMap s;
  std::uint64_t prev = 0;
  for (std::uint64_t i = 0; i < length; ++i) {
    prev += gaps.law == GapLaw::Geometric ? rng.geometric(gaps.p) : rng.range(1, std::max<std::uint64_t>(1, gaps.g));
    s.table.push_back(prev);
  }
  return s;
}

PermutationMap random_pi(std::uint64_t seed, std::uint64_t window, std::uint64_t length) {
  if (window < 1) throw Error(ErrorCode::InvalidArgument, "window must be >= 1");
  Rng rng(seed);
  PermutationMap p;
  const std::uint64_t m = (length + window - 1) / window * window;
  p.head.resize(m);
  for (std::uint64_t w0 = 0; w0 < m; w0 += window) {
    std::vector<std::uint64_t> seg(window);
    std::iota(seg.begin(), seg.end(), w0 + 1);
    rng.shuffle(seg);
    std::copy(seg.begin(), seg.end(), p.head.begin() + static_cast<std::ptrdiff_t>(w0));
  }
  return p;
}

}  // namespace idealconv
