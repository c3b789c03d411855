#include "idealconv/ideal.hpp"

#include "idealconv/error.hpp"
#include "idealconv/json_io.hpp"
#include "idealconv/meagerness.hpp"

#include <algorithm>
#include <map>
#include <mutex>

namespace idealconv {

std::string to_string(Membership m) {
  switch (m) {
    case Membership::In: return "In";
    case Membership::NotIn: return "NotIn";
    case Membership::Undecided: return "Undecided";
  }
  return "?";
}

std::vector<std::uint64_t> default_cuts(std::uint64_t N) { return {N / 2, N - N / 4, N - N / 8}; }

namespace {

// The same set written without the unit witness: block n is the integer n.
std::optional<NatSet> unit_equivalent(const NatSet& s) {
  if (s.kind() != SetKind::BlockUnion || s.witness().generator() != WitnessGenerator::Unit) return std::nullopt;
  const auto& sel = s.selector();
  switch (sel.kind()) {
    case SelectorKind::All: return NatSet::all();
    case SelectorKind::EveryKth: return NatSet::progression(sel.k(), sel.k());
    case SelectorKind::IndexSet: return sel.indices();
  }
  return std::nullopt;
}

Rational full_norm(const Lscsm& m) {
  const auto n = m.raw_norm_of_n();
  return n ? *n * m.scale() : Rational(0);
}

std::optional<Rational> block_union_norm(const Lscsm& m, const NatSet& s) {
  if (auto eq = unit_equivalent(s)) return exact_norm(m, *eq);
  const auto& w = s.witness();
  const auto& sel = s.selector();
  const Tri inf = sel.is_infinite();
  const Rational full = full_norm(m);
  if (inf == Tri::False) return Rational(0);
  if (sel.kind() == SelectorKind::All) return full;
  if (inf != Tri::True) return std::nullopt;
  switch (m.kind()) {
    case LscsmKind::CountingCap: return full;
    case LscsmKind::WeightedSum:
      if (m.weight_rule() == WeightRule::Table) return Rational(0);
      // Each block of a growing witness carries harmonic mass bounded below,
      // so infinitely many of them diverge.
      if (w.lengths_grow()) return full;
      return std::nullopt;
    case LscsmKind::RunningDensity:
      if (w.generator() == WitnessGenerator::Geometric && sel.kind() == SelectorKind::EveryKth) {
        // Upper density is reached at ends of selected blocks:
        // q (1 + r^k + r^{2k} + ...) with r = 1 - q.
        const Rational q = w.ratio_q();
        Rational rk = 1;
        for (std::uint64_t i = 0; i < sel.k(); ++i) rk *= (1 - q);
        return full * q / (1 - rk);
      }
      return std::nullopt;
    case LscsmKind::DensityFamily: return std::nullopt;
  }
  return std::nullopt;
}

std::optional<Rational> norm_from_form(const Lscsm& m, const PeriodicForm& f, const Rational& full) {
  switch (m.kind()) {
    case LscsmKind::RunningDensity:
    case LscsmKind::DensityFamily: return full * f.density();
    case LscsmKind::WeightedSum:
      if (m.weight_rule() == WeightRule::Table) return Rational(0);
      return f.empty() ? Rational(0) : full;
    case LscsmKind::CountingCap: return f.empty() ? Rational(0) : full;
  }
  return std::nullopt;
}

}  // namespace

std::optional<Rational> exact_norm(const Lscsm& m, const NatSet& s) {
  const Rational full = full_norm(m);
  if (full == 0) return Rational(0);
  switch (s.kind()) {
    case SetKind::Finite: return Rational(0);
    case SetKind::Cofinite: return full;
    case SetKind::BlockUnion:
      if (auto v = block_union_norm(m, s)) return v;
      break;
    case SetKind::Complement: {
      const auto inner = exact_norm(m, s.left());
      if (inner && *inner == 0) return full;
      break;
    }
    case SetKind::Intersection: {
      const auto l = exact_norm(m, s.left());
      if (l && *l == 0) return Rational(0);
      const auto r = exact_norm(m, s.right());
      if (r && *r == 0) return Rational(0);
      break;
    }
    case SetKind::Union: {
      const auto l = exact_norm(m, s.left());
      const auto r = exact_norm(m, s.right());
      if (l && r && *l == 0) return r;
      if (l && r && *r == 0) return l;
      break;
    }
    default: break;
  }
  if (const auto f = s.periodic_form()) return norm_from_form(m, *f, full);
  if (m.kind() == LscsmKind::CountingCap) {
    const Tri inf = s.is_infinite();
    if (inf == Tri::Unknown) return std::nullopt;
    return inf == Tri::True ? full : Rational(0);
  }
  if (const auto f = s.periodic_form_mod_sparse()) return norm_from_form(m, *f, full);
  return std::nullopt;
}

NormEstimate norm_estimate(const Lscsm& m, const NatSet& s, std::uint64_t N, std::vector<std::uint64_t> cuts) {
  if (N < 2) throw Error(ErrorCode::InvalidArgument, "norm estimate needs a horizon >= 2");
  if (cuts.empty()) cuts = default_cuts(N);
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    if (cuts[i] >= N || (i > 0 && cuts[i] <= cuts[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "cut points must increase and stay below the horizon");
  }
  NormEstimate out;
  out.exact = exact_norm(m, s);
  out.cuts = cuts;
  const Bits bits = s.prefix(N);
  for (auto t : cuts) {
    const double tail = m.phi_tail_double(bits, t, N);
    const double whole = m.phi_full_tail_double(t, N);
    out.tail_phi.push_back(tail);
    out.relative.push_back(whole > 0 ? tail / whole : 0.0);
  }
  out.numeric = out.relative.back();
  out.tail_hits = kernels::popcount(std::span<const std::uint8_t>(bits).subspan(N / 2));
  return out;
}

Membership fin_x_fin_rule(const NatSet& s) {
  switch (s.kind()) {
    case SetKind::Finite: return Membership::In;
    case SetKind::Cofinite: return Membership::NotIn;
    case SetKind::Progression: {
      // a + j d with d = 2^e o: if nu2(a) < e every member has valuation nu2(a),
      // so the set is one row; otherwise infinitely many rows are infinite.
      const unsigned e = two_adic_valuation(s.step());
      return two_adic_valuation(s.first()) < e ? Membership::In : Membership::NotIn;
    }
    case SetKind::PowersOf: return Membership::In;  // each row holds at most one power, or all sit in row 0
    case SetKind::BlockUnion: {
      if (auto eq = unit_equivalent(s)) return fin_x_fin_rule(*eq);
      const Tri inf = s.selector().is_infinite();
      if (inf == Tri::False) return Membership::In;
      if (inf == Tri::True && s.witness().lengths_grow()) return Membership::NotIn;
      return Membership::Undecided;
    }
    case SetKind::Bitmap: return Membership::Undecided;
    case SetKind::Union: {
      const auto l = fin_x_fin_rule(s.left());
      const auto r = fin_x_fin_rule(s.right());
      if (l == Membership::NotIn || r == Membership::NotIn) return Membership::NotIn;
      if (l == Membership::In && r == Membership::In) return Membership::In;
      return Membership::Undecided;
    }
    case SetKind::Intersection: {
      if (fin_x_fin_rule(s.left()) == Membership::In || fin_x_fin_rule(s.right()) == Membership::In)
        return Membership::In;
      return Membership::Undecided;
    }
    case SetKind::Complement:
      return fin_x_fin_rule(s.left()) == Membership::In ? Membership::NotIn : Membership::Undecided;
  }
  return Membership::Undecided;
}

IdealHandle::IdealHandle(std::string name, std::optional<Lscsm> lscsm, SpecialRule rule,
                         std::optional<WitnessIntervals> witness)
    : name_(std::move(name)), lscsm_(std::move(lscsm)), rule_(rule), witness_(std::move(witness)) {}

IdealHandle IdealHandle::with_witness(WitnessIntervals w) const {
  IdealHandle h = *this;
  h.witness_ = std::move(w);
  return h;
}

namespace {

MembershipResult symbolic_decide(const IdealHandle& I, const NatSet& s) {
  MembershipResult r;
  const Lscsm& m = *I.lscsm();
  if (auto e = exact_norm(m, s)) {
    r.exact = e;
    r.path = "exact";
    r.verdict = *e == 0 ? Membership::In : Membership::NotIn;
    return r;
  }
  r.path = "structural";
  switch (s.kind()) {
    case SetKind::BlockUnion: {
      const auto& w = s.witness();
      if (s.selector().is_infinite() == Tri::True && w.ideal() == I.name()) {
        r.verdict = Membership::NotIn;
        return r;
      }
      break;
    }
    case SetKind::Union: {
      const auto l = symbolic_decide(I, s.left()).verdict;
      const auto rr = symbolic_decide(I, s.right()).verdict;
      if (l == Membership::NotIn || rr == Membership::NotIn) r.verdict = Membership::NotIn;
      else if (l == Membership::In && rr == Membership::In) r.verdict = Membership::In;
      if (r.verdict != Membership::Undecided) return r;
      break;
    }
    case SetKind::Intersection:
      if (symbolic_decide(I, s.left()).verdict == Membership::In ||
          symbolic_decide(I, s.right()).verdict == Membership::In) {
        r.verdict = Membership::In;
        return r;
      }
      break;
    case SetKind::Complement:
      if (symbolic_decide(I, s.left()).verdict == Membership::In) {
        r.verdict = Membership::NotIn;
        return r;
      }
      break;
    default: break;
  }
  r.path = "none";
  r.verdict = Membership::Undecided;
  return r;
}

}  // namespace

MembershipResult IdealHandle::decide(const NatSet& s, const MembershipParams& p) const {
  if (rule_ == SpecialRule::FinTimesFin) {
    MembershipResult r;
    r.verdict = fin_x_fin_rule(s);
    r.path = r.verdict == Membership::Undecided ? "none" : "row-rule";
    return r;
  }
  if (!lscsm_) throw Error(ErrorCode::NotRepresentable, "ideal " + name_ + " has no membership procedure");
  MembershipResult r = symbolic_decide(*this, s);
  if (r.verdict != Membership::Undecided) return r;

  const std::uint64_t N = std::min(p.horizon, s.decidable_limit());
  if (N < 16) return r;
  NormEstimate est = norm_estimate(*lscsm_, s, N, p.cuts.empty() ? default_cuts(N) : p.cuts);
  r.path = "numeric";
  const double theta = to_double(p.theta);
  if (lscsm_->kind() == LscsmKind::CountingCap) {
    if (est.tail_hits >= p.hit_min) r.verdict = Membership::NotIn;
    else if (est.tail_hits == 0) r.verdict = Membership::In;
  } else {
    const bool all_below = std::all_of(est.relative.begin(), est.relative.end(), [&](double v) { return v < theta; });
    const bool all_above = std::all_of(est.relative.begin(), est.relative.end(), [&](double v) { return v >= theta; });
    if (all_below) r.verdict = Membership::In;
    else if (all_above && est.tail_hits >= p.hit_min) r.verdict = Membership::NotIn;
  }
  r.estimate = std::move(est);
  return r;
}

MembershipResult decide_membership(const IdealHandle& I, const NatSet& s, const MembershipParams& p) {
  return I.decide(s, p);
}

namespace {

IdealHandle make_builtin(const std::string& name) {
  if (name == "fin") {
    IdealHandle h("fin", Lscsm::counting_cap().normalized(), SpecialRule::None, std::nullopt);
    return h.with_witness(build_witness(h, Rational(1, 2)));
  }
  if (name == "density-zero") {
    IdealHandle h("density-zero", Lscsm::running_density().normalized(), SpecialRule::None, std::nullopt);
    return h.with_witness(build_witness(h, Rational(1, 2)));
  }
  if (name == "summable") {
    IdealHandle h("summable", Lscsm::harmonic(1).normalized(), SpecialRule::None, std::nullopt);
    return h.with_witness(build_witness(h, Rational(1, 2)));
  }
  if (name == "gdi") {
    return builtin_gdi(nlohmann::json{{"block_ends", {1, 2}}, {"weights", {"1", "1/2"}}});
  }
  if (name == "fin-x-fin") {
    IdealHandle h("fin-x-fin", std::nullopt, SpecialRule::FinTimesFin, std::nullopt);
    return h.with_witness(build_witness(h, Rational(1, 2)));
  }
  throw Error(ErrorCode::UnknownIdeal, "unknown ideal: " + name);
}

}  // namespace

IdealHandle builtin(const std::string& raw) {
  std::string name = raw;
  if (name == "Z" || name == "z") name = "density-zero";
  if (name == "fin-times-fin" || name == "finxfin") name = "fin-x-fin";
  static std::mutex mu;
  static std::map<std::string, IdealHandle> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(name); it != cache.end()) return it->second;
  IdealHandle h = make_builtin(name);
  cache.emplace(name, h);
  return h;
}

IdealHandle builtin_gdi(const nlohmann::json& spec) {
  BlockPartition blocks;
  std::vector<Rational> weights;
  try {
    blocks.ends = spec.value("block_ends", std::vector<std::uint64_t>{1, 2});
    for (const auto& w : spec.at("weights")) weights.push_back(rational_from_json(w));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed gdi spec: ") + e.what());
  }
  IdealHandle h("gdi", Lscsm::density_family(std::move(blocks), std::move(weights)).normalized(), SpecialRule::None,
                std::nullopt);
  return h.with_witness(build_witness(h, Rational(1, 2)));
}

std::vector<std::string> builtin_names() { return {"fin", "density-zero", "summable", "gdi", "fin-x-fin"}; }

}  // namespace idealconv
