#include "idealconv/natset.hpp"

#include "idealconv/error.hpp"
#include "idealconv/json_io.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

namespace idealconv {

namespace detail {

struct Node {
  SetKind kind = SetKind::Finite;
  int depth = 1;
  std::vector<std::uint64_t> elems;  // Finite members or Cofinite exclusions, sorted unique
  std::uint64_t a = 0;               // Progression first / PowersOf base
  std::uint64_t d = 0;               // Progression step
  std::optional<WitnessIntervals> w;
  BlockSelector sel;
  Bits bits;
  std::optional<NatSet> lhs;
  std::optional<NatSet> rhs;

  static NatSet wrap(std::shared_ptr<const Node> n) { return NatSet(std::move(n)); }
  static const Node& of(const NatSet& s) { return *s.node_; }
};

}  // namespace detail

using detail::Node;

namespace {

constexpr std::uint64_t kMaxPeriod = std::uint64_t{1} << 16;
constexpr std::uint64_t kNoLimit = std::numeric_limits<std::uint64_t>::max();
constexpr std::uint64_t kScanCap = std::uint64_t{1} << 26;

std::vector<std::uint64_t> normalize(std::vector<std::uint64_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  if (!v.empty() && v.front() == 0) throw Error(ErrorCode::InvalidArgument, "NatSet elements must be >= 1");
  return v;
}

Tri tri_or(Tri a, Tri b) {
  if (a == Tri::True || b == Tri::True) return Tri::True;
  if (a == Tri::False && b == Tri::False) return Tri::False;
  return Tri::Unknown;
}

Tri tri_and(Tri a, Tri b) {
  if (a == Tri::False || b == Tri::False) return Tri::False;
  if (a == Tri::True && b == Tri::True) return Tri::True;
  return Tri::Unknown;
}

Tri tri_not(Tri a) {
  if (a == Tri::Unknown) return a;
  return a == Tri::True ? Tri::False : Tri::True;
}

[[noreturn]] void horizon_exceeded(const std::string& what) { throw Error(ErrorCode::HorizonExceeded, what); }

const Node& node(const NatSet& s) { return Node::of(s); }

std::optional<PeriodicForm> combine(const std::optional<PeriodicForm>& a, const std::optional<PeriodicForm>& b,
                                    bool is_union) {
  if (!a || !b) return std::nullopt;
  const std::uint64_t l = std::lcm(a->period, b->period);
  if (l > kMaxPeriod) return std::nullopt;
  PeriodicForm out;
  out.period = l;
  out.residues.assign(l, 0);
  for (std::uint64_t r = 0; r < l; ++r) {
    const bool x = a->residues[r % a->period];
    const bool y = b->residues[r % b->period];
    out.residues[r] = is_union ? (x || y) : (x && y);
  }
  out.settle = std::max(a->settle, b->settle);
  return out;
}

PeriodicForm constant_form(bool on, std::uint64_t settle) {
  PeriodicForm f;
  f.period = 1;
  f.residues = {static_cast<std::uint8_t>(on)};
  f.settle = std::max<std::uint64_t>(settle, 1);
  return f;
}

std::optional<PeriodicForm> form_impl(const NatSet& s, bool mod_sparse);

// A BlockUnion is periodic only in the degenerate cases: finitely many blocks,
// or every block from iota_1 on.
std::optional<PeriodicForm> block_union_form(const Node& n) {
  const auto& w = *n.w;
  if (n.sel.kind() == SelectorKind::All) return constant_form(true, *w.iota(1));
  if (n.sel.kind() == SelectorKind::IndexSet && n.sel.indices().is_infinite() == Tri::False) {
    const NatSet& idx = n.sel.indices();
    // Largest selected block index: scan through the (finite) index set.
    const auto f = idx.periodic_form();
    std::uint64_t last = 0;
    const std::uint64_t upto = f ? f->settle : idx.decidable_limit();
    if (upto == kNoLimit) return std::nullopt;
    for (std::uint64_t b = 1; b <= upto; ++b) {
      const Tri t = idx.member(b);
      if (t == Tri::Unknown) return std::nullopt;
      if (t == Tri::True) last = b;
    }
    if (last == 0) return constant_form(false, 1);
    const auto end = w.iota(last + 1);
    if (!end) return std::nullopt;
    return constant_form(false, *end);
  }
  return std::nullopt;
}

std::optional<PeriodicForm> form_impl(const NatSet& s, bool mod_sparse) {
  const Node& n = node(s);
  switch (n.kind) {
    case SetKind::Finite:
      return constant_form(false, n.elems.empty() ? 1 : n.elems.back() + 1);
    case SetKind::Cofinite:
      return constant_form(true, n.elems.empty() ? 1 : n.elems.back() + 1);
    case SetKind::Progression: {
      if (n.d > kMaxPeriod) return std::nullopt;
      PeriodicForm f;
      f.period = n.d;
      f.residues.assign(n.d, 0);
      f.residues[n.a % n.d] = 1;
      f.settle = n.a;
      return f;
    }
    case SetKind::PowersOf:
      if (mod_sparse) return constant_form(false, 1);
      return std::nullopt;
    case SetKind::BlockUnion:
      return block_union_form(n);
    case SetKind::Bitmap:
      return std::nullopt;
    case SetKind::Union:
      return combine(form_impl(*n.lhs, mod_sparse), form_impl(*n.rhs, mod_sparse), true);
    case SetKind::Intersection:
      return combine(form_impl(*n.lhs, mod_sparse), form_impl(*n.rhs, mod_sparse), false);
    case SetKind::Complement: {
      auto f = form_impl(*n.lhs, mod_sparse);
      if (!f) return std::nullopt;
      for (auto& r : f->residues) r ^= 1;
      return f;
    }
  }
  return std::nullopt;
}

std::uint64_t sat_mul(std::uint64_t x, std::uint64_t y) {
  if (x != 0 && y > kNoLimit / x) return kNoLimit;
  return x * y;
}

}  // namespace

std::string to_string(Tri t) {
  switch (t) {
    case Tri::False: return "false";
    case Tri::True: return "true";
    case Tri::Unknown: return "unknown";
  }
  return "?";
}

// ---------------------------------------------------------------- selector

BlockSelector BlockSelector::all() { return BlockSelector{}; }

BlockSelector BlockSelector::every_kth(std::uint64_t k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "EveryKth requires k >= 1");
  BlockSelector s;
  s.kind_ = SelectorKind::EveryKth;
  s.k_ = k;
  return s;
}

BlockSelector BlockSelector::index_set(const NatSet& idx) {
  BlockSelector s;
  s.kind_ = SelectorKind::IndexSet;
  s.indices_ = std::make_shared<const NatSet>(idx);
  return s;
}

const NatSet& BlockSelector::indices() const {
  if (!indices_) throw Error(ErrorCode::InvalidArgument, "selector has no index set");
  return *indices_;
}

Tri BlockSelector::selects(std::uint64_t block) const {
  if (block == 0) return Tri::False;
  switch (kind_) {
    case SelectorKind::All: return Tri::True;
    case SelectorKind::EveryKth: return tri(block % k_ == 0);
    case SelectorKind::IndexSet: return indices_->member(block);
  }
  return Tri::Unknown;
}

Tri BlockSelector::is_infinite() const {
  if (kind_ == SelectorKind::IndexSet) return indices_->is_infinite();
  return Tri::True;
}

// ---------------------------------------------------------------- periodic form

std::uint64_t PeriodicForm::ones() const {
  return static_cast<std::uint64_t>(std::count(residues.begin(), residues.end(), std::uint8_t{1}));
}

Rational PeriodicForm::density() const { return Rational(BigInt(ones()), BigInt(period)); }

// ---------------------------------------------------------------- construction

NatSet NatSet::finite(std::vector<std::uint64_t> elements) {
  auto n = std::make_shared<Node>();
  n->kind = SetKind::Finite;
  n->elems = normalize(std::move(elements));
  return NatSet(std::move(n));
}

NatSet NatSet::cofinite(std::vector<std::uint64_t> excluded) {
  auto n = std::make_shared<Node>();
  n->kind = SetKind::Cofinite;
  n->elems = normalize(std::move(excluded));
  return NatSet(std::move(n));
}

NatSet NatSet::progression(std::uint64_t first, std::uint64_t step) {
  if (first < 1 || step < 1) throw Error(ErrorCode::InvalidArgument, "Progression requires first >= 1 and step >= 1");
  auto n = std::make_shared<Node>();
  n->kind = SetKind::Progression;
  n->a = first;
  n->d = step;
  return NatSet(std::move(n));
}

NatSet NatSet::powers_of(std::uint64_t base) {
  if (base < 2) throw Error(ErrorCode::InvalidArgument, "PowersOf requires base >= 2");
  auto n = std::make_shared<Node>();
  n->kind = SetKind::PowersOf;
  n->a = base;
  return NatSet(std::move(n));
}

NatSet NatSet::block_union(const WitnessIntervals& w, const BlockSelector& sel) {
  auto n = std::make_shared<Node>();
  n->kind = SetKind::BlockUnion;
  n->w = w;
  n->sel = sel;
  n->depth = sel.kind() == SelectorKind::IndexSet ? sel.indices().depth() + 1 : 1;
  if (n->depth > kMaxDepth) throw Error(ErrorCode::DepthExceeded, "NatSet tree deeper than 32");
  return NatSet(std::move(n));
}

NatSet NatSet::bitmap(Bits bits) {
  auto n = std::make_shared<Node>();
  n->kind = SetKind::Bitmap;
  for (auto& b : bits) b = b ? 1 : 0;
  n->bits = std::move(bits);
  return NatSet(std::move(n));
}

namespace {
NatSet make_binary(SetKind kind, const NatSet& a, const NatSet& b) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->depth = std::max(a.depth(), b.depth()) + 1;
  if (n->depth > kMaxDepth) throw Error(ErrorCode::DepthExceeded, "NatSet tree deeper than 32");
  n->lhs = a;
  n->rhs = b;
  return Node::wrap(std::move(n));
}
}  // namespace

NatSet NatSet::set_union(const NatSet& a, const NatSet& b) { return make_binary(SetKind::Union, a, b); }
NatSet NatSet::set_intersection(const NatSet& a, const NatSet& b) {
  return make_binary(SetKind::Intersection, a, b);
}

NatSet NatSet::complement(const NatSet& a) {
  auto n = std::make_shared<Node>();
  n->kind = SetKind::Complement;
  n->depth = a.depth() + 1;
  if (n->depth > kMaxDepth) throw Error(ErrorCode::DepthExceeded, "NatSet tree deeper than 32");
  n->lhs = a;
  return NatSet(std::move(n));
}

NatSet NatSet::interval(std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> v;
  if (lo < 1) lo = 1;
  for (std::uint64_t i = lo; i <= hi; ++i) v.push_back(i);
  return finite(std::move(v));
}

// ---------------------------------------------------------------- accessors

SetKind NatSet::kind() const { return node_->kind; }
int NatSet::depth() const { return node_->depth; }

namespace {
void expect(const Node& n, std::initializer_list<SetKind> kinds) {
  for (auto k : kinds)
    if (n.kind == k) return;
  throw Error(ErrorCode::InvalidArgument, "NatSet accessor used on the wrong kind");
}
}  // namespace

const std::vector<std::uint64_t>& NatSet::elements() const {
  expect(*node_, {SetKind::Finite, SetKind::Cofinite});
  return node_->elems;
}
std::uint64_t NatSet::first() const {
  expect(*node_, {SetKind::Progression});
  return node_->a;
}
std::uint64_t NatSet::step() const {
  expect(*node_, {SetKind::Progression});
  return node_->d;
}
std::uint64_t NatSet::base() const {
  expect(*node_, {SetKind::PowersOf});
  return node_->a;
}
const WitnessIntervals& NatSet::witness() const {
  expect(*node_, {SetKind::BlockUnion});
  return *node_->w;
}
const BlockSelector& NatSet::selector() const {
  expect(*node_, {SetKind::BlockUnion});
  return node_->sel;
}
const Bits& NatSet::bits() const {
  expect(*node_, {SetKind::Bitmap});
  return node_->bits;
}
std::uint64_t NatSet::horizon() const {
  expect(*node_, {SetKind::Bitmap});
  return node_->bits.size();
}
const NatSet& NatSet::left() const {
  expect(*node_, {SetKind::Union, SetKind::Intersection, SetKind::Complement});
  return *node_->lhs;
}
const NatSet& NatSet::right() const {
  expect(*node_, {SetKind::Union, SetKind::Intersection});
  return *node_->rhs;
}

// ---------------------------------------------------------------- membership

Tri NatSet::member(std::uint64_t n) const {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "membership queried for 0");
  const Node& x = *node_;
  switch (x.kind) {
    case SetKind::Finite: return tri(std::binary_search(x.elems.begin(), x.elems.end(), n));
    case SetKind::Cofinite: return tri(!std::binary_search(x.elems.begin(), x.elems.end(), n));
    case SetKind::Progression: return tri(n >= x.a && (n - x.a) % x.d == 0);
    case SetKind::PowersOf: {
      if (n < x.a) return Tri::False;
      while (n % x.a == 0) n /= x.a;
      return tri(n == 1);
    }
    case SetKind::BlockUnion: {
      const auto b = x.w->block_of(n);
      if (!b) return Tri::Unknown;
      return x.sel.selects(*b);
    }
    case SetKind::Bitmap:
      if (n > x.bits.size()) return Tri::Unknown;
      return tri(x.bits[n - 1]);
    case SetKind::Union: return tri_or(x.lhs->member(n), x.rhs->member(n));
    case SetKind::Intersection: return tri_and(x.lhs->member(n), x.rhs->member(n));
    case SetKind::Complement: return tri_not(x.lhs->member(n));
  }
  return Tri::Unknown;
}

Bits NatSet::prefix(std::uint64_t N) const {
  const Node& x = *node_;
  switch (x.kind) {
    case SetKind::Finite: {
      Bits out(N, 0);
      for (auto e : x.elems) {
        if (e > N) break;
        out[e - 1] = 1;
      }
      return out;
    }
    case SetKind::Cofinite: {
      Bits out(N, 1);
      for (auto e : x.elems) {
        if (e > N) break;
        out[e - 1] = 0;
      }
      return out;
    }
    case SetKind::Progression: {
      Bits out(N, 0);
      for (std::uint64_t i = x.a; i <= N; i += x.d) out[i - 1] = 1;
      return out;
    }
    case SetKind::PowersOf: {
      Bits out(N, 0);
      for (std::uint64_t p = x.a; p <= N; p = sat_mul(p, x.a)) {
        out[p - 1] = 1;
        if (p > N / x.a) break;
      }
      return out;
    }
    case SetKind::BlockUnion: {
      Bits out(N, 0);
      const auto& w = *x.w;
      if (w.generator() == WitnessGenerator::Unit) {
        if (x.sel.kind() == SelectorKind::IndexSet) return x.sel.indices().prefix(N);
        for (std::uint64_t i = 1; i <= N; ++i) out[i - 1] = x.sel.selects(i) == Tri::True;
        return out;
      }
      for (std::uint64_t b = 1;; ++b) {
        const auto lo = w.iota(b);
        if (!lo) horizon_exceeded("witness table shorter than prefix horizon");
        if (*lo > N) break;
        const auto hi = w.iota(b + 1);
        if (!hi) horizon_exceeded("witness table shorter than prefix horizon");
        const Tri t = x.sel.selects(b);
        if (t == Tri::Unknown) horizon_exceeded("block selector undecided within prefix horizon");
        if (t == Tri::True) {
          const std::uint64_t end = std::min<std::uint64_t>(*hi - 1, N);
          std::fill(out.begin() + static_cast<std::ptrdiff_t>(*lo - 1), out.begin() + static_cast<std::ptrdiff_t>(end), 1);
        }
      }
      return out;
    }
    case SetKind::Bitmap: {
      if (N > x.bits.size()) horizon_exceeded("bitmap horizon " + std::to_string(x.bits.size()) + " < " + std::to_string(N));
      return Bits(x.bits.begin(), x.bits.begin() + static_cast<std::ptrdiff_t>(N));
    }
    case SetKind::Union: {
      Bits out = x.lhs->prefix(N);
      kernels::or_into(out, x.rhs->prefix(N));
      return out;
    }
    case SetKind::Intersection: {
      Bits out = x.lhs->prefix(N);
      kernels::and_into(out, x.rhs->prefix(N));
      return out;
    }
    case SetKind::Complement: {
      Bits out = x.lhs->prefix(N);
      kernels::flip(out);
      return out;
    }
  }
  return {};
}

std::uint64_t NatSet::count_up_to(std::uint64_t N) const {
  const Node& x = *node_;
  switch (x.kind) {
    case SetKind::Finite:
      return static_cast<std::uint64_t>(std::upper_bound(x.elems.begin(), x.elems.end(), N) - x.elems.begin());
    case SetKind::Cofinite:
      return N - static_cast<std::uint64_t>(std::upper_bound(x.elems.begin(), x.elems.end(), N) - x.elems.begin());
    case SetKind::Progression:
      return N < x.a ? 0 : (N - x.a) / x.d + 1;
    case SetKind::PowersOf: {
      std::uint64_t c = 0;
      for (std::uint64_t p = x.a; p <= N; p = sat_mul(p, x.a)) {
        ++c;
        if (p > N / x.a) break;
      }
      return c;
    }
    case SetKind::BlockUnion: {
      const auto& w = *x.w;
      if (w.generator() == WitnessGenerator::Unit || x.sel.kind() == SelectorKind::IndexSet) break;
      std::uint64_t c = 0;
      for (std::uint64_t b = 1;; ++b) {
        const auto lo = w.iota(b);
        const auto hi = w.iota(b + 1);
        if (!lo || !hi) horizon_exceeded("witness table shorter than count horizon");
        if (*lo > N) break;
        if (x.sel.selects(b) == Tri::True) c += std::min<std::uint64_t>(*hi - 1, N) - *lo + 1;
      }
      return c;
    }
    default:
      break;
  }
  if (x.kind == SetKind::BlockUnion && x.w->generator() == WitnessGenerator::Unit &&
      x.sel.kind() == SelectorKind::EveryKth) {
    return N / x.sel.k();
  }
  if (x.kind == SetKind::BlockUnion && x.w->generator() == WitnessGenerator::Unit &&
      x.sel.kind() == SelectorKind::All) {
    return N;
  }
  return kernels::popcount(prefix(N));
}

// ---------------------------------------------------------------- enumeration

namespace {

std::optional<std::uint64_t> next_by_form(const NatSet& s, const PeriodicForm& f, std::uint64_t from,
                                          std::uint64_t limit) {
  std::uint64_t c = from;
  for (; c < f.settle && c <= limit; ++c) {
    const Tri t = s.member(c);
    if (t == Tri::Unknown) horizon_exceeded("membership unknown during enumeration");
    if (t == Tri::True) return c;
  }
  if (c > limit || f.empty()) return std::nullopt;
  for (std::uint64_t k = 0; k < f.period; ++k, ++c) {
    if (c > limit) return std::nullopt;
    if (f.residues[c % f.period]) return c;
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::uint64_t> NatSet::next_member(std::uint64_t from, std::uint64_t limit) const {
  if (from == 0) from = 1;
  if (from > limit) return std::nullopt;
  const Node& x = *node_;
  switch (x.kind) {
    case SetKind::Finite: {
      const auto it = std::lower_bound(x.elems.begin(), x.elems.end(), from);
      if (it == x.elems.end() || *it > limit) return std::nullopt;
      return *it;
    }
    case SetKind::Cofinite: {
      std::uint64_t c = from;
      auto it = std::lower_bound(x.elems.begin(), x.elems.end(), c);
      while (it != x.elems.end() && *it == c) {
        ++c;
        ++it;
      }
      if (c > limit) return std::nullopt;
      return c;
    }
    case SetKind::Progression: {
      std::uint64_t c = x.a;
      if (from > x.a) {
        const std::uint64_t steps = (from - x.a + x.d - 1) / x.d;
        if (steps > (kNoLimit - x.a) / x.d) return std::nullopt;
        c = x.a + steps * x.d;
      }
      if (c > limit) return std::nullopt;
      return c;
    }
    case SetKind::PowersOf: {
      std::uint64_t p = x.a;
      while (p < from) {
        if (p > kNoLimit / x.a) return std::nullopt;
        p *= x.a;
      }
      if (p > limit) return std::nullopt;
      return p;
    }
    case SetKind::BlockUnion: {
      const auto& w = *x.w;
      if (w.generator() == WitnessGenerator::Unit) {
        switch (x.sel.kind()) {
          case SelectorKind::All: return from;
          case SelectorKind::EveryKth: {
            const std::uint64_t k = x.sel.k();
            const std::uint64_t c = (from + k - 1) / k * k;
            if (c > limit) return std::nullopt;
            return c;
          }
          case SelectorKind::IndexSet: return x.sel.indices().next_member(from, limit);
        }
      }
      const auto b0 = w.block_of(from);
      if (!b0) horizon_exceeded("enumeration beyond witness table");
      for (std::uint64_t b = std::max<std::uint64_t>(*b0, 1);; ++b) {
        const auto lo = w.iota(b);
        const auto hi = w.iota(b + 1);
        if (!lo) return std::nullopt;
        if (*lo > limit) return std::nullopt;
        if (!hi) horizon_exceeded("enumeration beyond witness table");
        const Tri t = x.sel.selects(b);
        if (t == Tri::Unknown) horizon_exceeded("block selector undecided");
        if (t == Tri::True) {
          const std::uint64_t c = std::max(*lo, from);
          if (c < *hi) return c <= limit ? std::optional<std::uint64_t>(c) : std::nullopt;
        }
      }
    }
    case SetKind::Bitmap: {
      const std::uint64_t h = x.bits.size();
      for (std::uint64_t c = from; c <= std::min(limit, h); ++c)
        if (x.bits[c - 1]) return c;
      if (limit > h) horizon_exceeded("enumeration beyond bitmap horizon");
      return std::nullopt;
    }
    case SetKind::Union: {
      const auto l = x.lhs->next_member(from, limit);
      const auto r = x.rhs->next_member(from, l ? *l : limit);
      if (!l) return r;
      if (!r) return l;
      return std::min(*l, *r);
    }
    case SetKind::Intersection:
    case SetKind::Complement: {
      if (const auto f = periodic_form()) return next_by_form(*this, *f, from, limit);
      std::uint64_t c = from;
      for (std::uint64_t iter = 0; iter < kScanCap; ++iter) {
        if (x.kind == SetKind::Intersection) {
          const auto l = x.lhs->next_member(c, limit);
          if (!l) return std::nullopt;
          const auto r = x.rhs->next_member(*l, limit);
          if (!r) return std::nullopt;
          if (*r == *l) return r;
          c = *r;
        } else {
          const auto m = x.lhs->next_member(c, c);
          if (!m) return c;
          if (c == limit) return std::nullopt;
          ++c;
        }
      }
      horizon_exceeded("enumeration scan cap reached");
    }
  }
  return std::nullopt;
}

Tri NatSet::is_infinite() const {
  const Node& x = *node_;
  switch (x.kind) {
    case SetKind::Finite: return Tri::False;
    case SetKind::Cofinite:
    case SetKind::Progression:
    case SetKind::PowersOf: return Tri::True;
    case SetKind::BlockUnion: return x.sel.is_infinite();
    case SetKind::Bitmap: return Tri::Unknown;
    case SetKind::Union: return tri_or(x.lhs->is_infinite(), x.rhs->is_infinite());
    case SetKind::Intersection:
    case SetKind::Complement: {
      if (x.kind == SetKind::Intersection &&
          (x.lhs->is_infinite() == Tri::False || x.rhs->is_infinite() == Tri::False))
        return Tri::False;
      if (x.kind == SetKind::Complement && x.lhs->is_infinite() == Tri::False) return Tri::True;
      if (const auto f = periodic_form()) return tri(!f->empty());
      if (const auto f = periodic_form_mod_sparse(); f && !f->empty()) return Tri::True;
      return Tri::Unknown;
    }
  }
  return Tri::Unknown;
}

std::uint64_t NatSet::decidable_limit() const {
  const Node& x = *node_;
  switch (x.kind) {
    case SetKind::Bitmap: return x.bits.size();
    case SetKind::BlockUnion: {
      std::uint64_t lim = kNoLimit;
      if (x.w->generator() == WitnessGenerator::Table) lim = *x.w->iota(x.w->known_blocks() + 1) - 1;
      if (x.sel.kind() == SelectorKind::IndexSet) {
        const std::uint64_t idx = x.sel.indices().decidable_limit();
        if (idx != kNoLimit) {
          const auto end = x.w->iota(idx + 1);
          if (end) lim = std::min(lim, *end - 1);
        }
      }
      return lim;
    }
    case SetKind::Union:
    case SetKind::Intersection: return std::min(x.lhs->decidable_limit(), x.rhs->decidable_limit());
    case SetKind::Complement: return x.lhs->decidable_limit();
    default: return kNoLimit;
  }
}

std::optional<PeriodicForm> NatSet::periodic_form() const { return form_impl(*this, false); }
std::optional<PeriodicForm> NatSet::periodic_form_mod_sparse() const { return form_impl(*this, true); }

bool NatSet::is_sparse() const {
  const auto f = periodic_form_mod_sparse();
  return f && f->empty();
}

// ---------------------------------------------------------------- serialization

json NatSet::to_json() const {
  const Node& x = *node_;
  switch (x.kind) {
    case SetKind::Finite: return json{{"kind", "finite"}, {"elements", x.elems}};
    case SetKind::Cofinite: return json{{"kind", "cofinite"}, {"excluded", x.elems}};
    case SetKind::Progression: return json{{"kind", "progression"}, {"first", x.a}, {"step", x.d}};
    case SetKind::PowersOf: return json{{"kind", "powers"}, {"base", x.a}};
    case SetKind::BlockUnion:
      return json{{"kind", "block_union"}, {"witness", witness_to_json(*x.w, 0)}, {"selector", selector_to_json(x.sel)}};
    case SetKind::Bitmap: {
      std::vector<std::uint64_t> ones;
      for (std::uint64_t i = 0; i < x.bits.size(); ++i)
        if (x.bits[i]) ones.push_back(i + 1);
      return json{{"kind", "bitmap"}, {"horizon", x.bits.size()}, {"ones", ones}};
    }
    case SetKind::Union: return json{{"kind", "union"}, {"of", json::array({x.lhs->to_json(), x.rhs->to_json()})}};
    case SetKind::Intersection:
      return json{{"kind", "intersection"}, {"of", json::array({x.lhs->to_json(), x.rhs->to_json()})}};
    case SetKind::Complement: return json{{"kind", "complement"}, {"of", x.lhs->to_json()}};
  }
  return {};
}

NatSet NatSet::from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw Error(ErrorCode::InvalidArgument, "NatSet JSON needs a kind");
  const std::string kind = j.at("kind").get<std::string>();
  try {
    if (kind == "finite") return finite(j.at("elements").get<std::vector<std::uint64_t>>());
    if (kind == "cofinite") return cofinite(j.value("excluded", std::vector<std::uint64_t>{}));
    if (kind == "progression") return progression(j.at("first").get<std::uint64_t>(), j.at("step").get<std::uint64_t>());
    if (kind == "powers") return powers_of(j.at("base").get<std::uint64_t>());
    if (kind == "block_union")
      return block_union(witness_from_json(j.at("witness")), selector_from_json(j.at("selector")));
    if (kind == "bitmap") {
      Bits bits(j.at("horizon").get<std::uint64_t>(), 0);
      for (auto v : j.at("ones").get<std::vector<std::uint64_t>>()) {
        if (v < 1 || v > bits.size()) throw Error(ErrorCode::InvalidArgument, "bitmap member outside horizon");
        bits[v - 1] = 1;
      }
      return bitmap(std::move(bits));
    }
    if (kind == "union" || kind == "intersection") {
      const auto& of = j.at("of");
      if (!of.is_array() || of.size() < 2) throw Error(ErrorCode::InvalidArgument, kind + " needs >= 2 operands");
      NatSet acc = from_json(of[0]);
      for (std::size_t i = 1; i < of.size(); ++i) {
        acc = kind == "union" ? set_union(acc, from_json(of[i])) : set_intersection(acc, from_json(of[i]));
      }
      return acc;
    }
    if (kind == "complement") return complement(from_json(j.at("of")));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed NatSet JSON: ") + e.what());
  }
  throw Error(ErrorCode::InvalidArgument, "unknown NatSet kind: " + kind);
}

std::string NatSet::describe() const {
  const Node& x = *node_;
  std::ostringstream os;
  auto list = [&](const std::vector<std::uint64_t>& v) {
    os << "{";
    for (std::size_t i = 0; i < v.size() && i < 8; ++i) os << (i ? "," : "") << v[i];
    if (v.size() > 8) os << ",...(" << v.size() << ")";
    os << "}";
  };
  switch (x.kind) {
    case SetKind::Finite: os << "Finite("; list(x.elems); os << ")"; break;
    case SetKind::Cofinite: os << "Cofinite("; list(x.elems); os << ")"; break;
    case SetKind::Progression: os << "Progression(" << x.a << "," << x.d << ")"; break;
    case SetKind::PowersOf: os << "PowersOf(" << x.a << ")"; break;
    case SetKind::BlockUnion: {
      os << "BlockUnion(" << to_string(x.w->generator()) << ",";
      switch (x.sel.kind()) {
        case SelectorKind::All: os << "All"; break;
        case SelectorKind::EveryKth: os << "EveryKth(" << x.sel.k() << ")"; break;
        case SelectorKind::IndexSet: os << "IndexSet(" << x.sel.indices().describe() << ")"; break;
      }
      os << ")";
      break;
    }
    case SetKind::Bitmap: os << "Bitmap(horizon=" << x.bits.size() << ")"; break;
    case SetKind::Union: os << "Union(" << x.lhs->describe() << "," << x.rhs->describe() << ")"; break;
    case SetKind::Intersection: os << "Intersection(" << x.lhs->describe() << "," << x.rhs->describe() << ")"; break;
    case SetKind::Complement: os << "Complement(" << x.lhs->describe() << ")"; break;
  }
  return os.str();
}

bool operator==(const NatSet& a, const NatSet& b) {
  if (a.node_ == b.node_) return true;
  const Node& x = *a.node_;
  const Node& y = *b.node_;
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case SetKind::Finite:
    case SetKind::Cofinite: return x.elems == y.elems;
    case SetKind::Progression: return x.a == y.a && x.d == y.d;
    case SetKind::PowersOf: return x.a == y.a;
    case SetKind::BlockUnion: {
      if (!(*x.w == *y.w) || x.sel.kind() != y.sel.kind()) return false;
      if (x.sel.kind() == SelectorKind::EveryKth) return x.sel.k() == y.sel.k();
      if (x.sel.kind() == SelectorKind::IndexSet) return x.sel.indices() == y.sel.indices();
      return true;
    }
    case SetKind::Bitmap: return x.bits == y.bits;
    case SetKind::Union:
    case SetKind::Intersection: return *x.lhs == *y.lhs && *x.rhs == *y.rhs;
    case SetKind::Complement: return *x.lhs == *y.lhs;
  }
  return false;
}

}  // namespace idealconv
