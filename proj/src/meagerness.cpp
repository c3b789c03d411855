#include "idealconv/meagerness.hpp"

#include "idealconv/error.hpp"
#include "idealconv/json_io.hpp"
#include "idealconv/rng.hpp"

#include <algorithm>
#include <cmath>

namespace idealconv {

namespace {

constexpr std::uint64_t kNoLimit = std::numeric_limits<std::uint64_t>::max();

// Least m > u with phi([u, m)) >= q, or nullopt when m - 1 would pass the horizon.
std::optional<std::uint64_t> next_phi_block(const Lscsm& m, std::uint64_t u, const Rational& q, std::uint64_t horizon) {
  switch (m.kind()) {
    case LscsmKind::CountingCap: return u + 1;
    case LscsmKind::RunningDensity: {
      // (m - u) / (m - 1) >= q  <=>  m >= (u - q) / (1 - q)
      const Rational bound = (Rational(BigInt(u)) - q) / (1 - q);
      BigInt c = boost::multiprecision::numerator(bound) / boost::multiprecision::denominator(bound);
      if (Rational(c) < bound) c += 1;
      std::uint64_t v = std::max<std::uint64_t>(u + 1, c.convert_to<std::uint64_t>());
      if (v - 1 > horizon) return std::nullopt;
      return v;
    }
    case LscsmKind::DensityFamily: {
      std::optional<std::uint64_t> best;
      const Rational target = q / m.scale();
      for (std::uint64_t n = m.blocks().block_of(u);; ++n) {
        const auto [a, b] = m.blocks().block(n);
        if (best && a >= *best) break;
        if (a > horizon + 1) break;
        const Rational& w = m.weights()[(n - 1) % m.weights().size()];
        const Rational need = target * Rational(BigInt(b - a)) / w;
        BigInt c = boost::multiprecision::numerator(need) / boost::multiprecision::denominator(need);
        if (Rational(c) < need) c += 1;
        if (c < 1) c = 1;
        const std::uint64_t start = std::max(u, a);
        if (c > BigInt(b - start)) continue;
        const std::uint64_t cand = start + c.convert_to<std::uint64_t>();
        if (!best || cand < *best) best = cand;
      }
      if (!best || *best - 1 > horizon) return std::nullopt;
      return best;
    }
    case LscsmKind::WeightedSum: {
      if (m.weight_rule() == WeightRule::Table) {
        Rational sum = 0;
        for (std::uint64_t v = u; v <= std::min<std::uint64_t>(horizon, m.weights().size()); ++v) {
          sum += m.weights()[v - 1] * m.scale();
          if (sum >= q) return v + 1;
        }
        return std::nullopt;
      }
      // Harmonic: locate the crossing in floating point, then move right until
      // the certified lower bound reaches q.
      const double qd = to_double(q / m.scale());
      double sum = 0;
      std::uint64_t v = u;
      while (v <= horizon) {
        sum += 1.0 / static_cast<double>(v);
        if (sum >= qd * (1 - 1e-12)) break;
        ++v;
      }
      if (v > horizon) return std::nullopt;
      const std::uint64_t step = std::max<std::uint64_t>(1, (v - u + 1) / 512);
      for (int guard = 0; guard < 4096; ++guard) {
        if (v > horizon) return std::nullopt;
        if (m.phi_interval_lower(u, v) >= q) {
          // Walk back while a smaller end still certifies (exact on short ranges).
          while (v > u && m.phi_interval_lower(u, v - 1) >= q && v - u < 64) --v;
          return v + 1;
        }
        v += step;
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::uint64_t block_len(const WitnessIntervals& w, std::uint64_t n) {
  const auto lo = w.iota(n);
  const auto hi = w.iota(n + 1);
  if (!lo || !hi) return 0;
  return *hi - *lo;
}

bool eventually_all_ones(const NatSet& s) {
  switch (s.kind()) {
    case SetKind::Cofinite: return true;
    case SetKind::BlockUnion: return s.selector().kind() == SelectorKind::All;
    case SetKind::Union: return eventually_all_ones(s.left()) || eventually_all_ones(s.right());
    case SetKind::Intersection: return eventually_all_ones(s.left()) && eventually_all_ones(s.right());
    default: break;
  }
  const auto f = s.periodic_form();
  return f && f->all_ones();
}

std::optional<std::uint64_t> finite_max(const NatSet& s) {
  if (s.kind() != SetKind::Finite) return std::nullopt;
  return s.elements().empty() ? 0 : s.elements().back();
}

// No block with index >= nu is contained in s, from the structure of s alone.
bool certifies(const WitnessIntervals& w, const NatSet& s, std::uint64_t nu) {
  const auto start = w.iota(nu);
  if (!start) return true;  // no known blocks remain
  // Smallest length among the remaining known blocks (lengths never shrink for
  // closed forms; tables are scanned).
  std::uint64_t min_len = block_len(w, nu);
  if (w.generator() == WitnessGenerator::Table) {
    for (std::uint64_t n = nu; n <= w.known_blocks(); ++n) min_len = std::min(min_len, block_len(w, n));
    if (nu > w.known_blocks()) return true;
  }
  switch (s.kind()) {
    case SetKind::Finite: {
      // Every later block ends at or after the end of block nu.
      const auto end = w.iota(nu + 1);
      return !end || *finite_max(s) < *end - 1;
    }
    case SetKind::PowersOf:
      // Two consecutive integers are both powers of b only for {1, 2}.
      return min_len >= 2 && *start >= 3;
    case SetKind::BlockUnion: {
      if (!(s.witness() == w)) break;
      const auto& sel = s.selector();
      if (sel.kind() != SelectorKind::IndexSet) return false;
      try {
        return !sel.indices().next_member(nu, std::uint64_t{1} << 62).has_value();
      } catch (const Error&) {
        return false;
      }
    }
    case SetKind::Intersection: return certifies(w, s.left(), nu) || certifies(w, s.right(), nu);
    case SetKind::Union: {
      const auto lm = finite_max(s.left());
      const auto rm = finite_max(s.right());
      if (lm && *lm < *start && certifies(w, s.right(), nu)) return true;
      if (rm && *rm < *start && certifies(w, s.left(), nu)) return true;
      break;
    }
    default: break;
  }
  if (const auto f = s.periodic_form(); f && !f->all_ones()) {
    return *start >= f->settle && min_len >= f->period;
  }
  return false;
}

}  // namespace

WitnessIntervals build_witness(const IdealHandle& I, const Rational& q, std::uint64_t horizon) {
  if (q <= 0 || q >= 1) throw Error(ErrorCode::InvalidArgument, "witness mass q must lie in (0,1)");
  if (I.special_rule() == SpecialRule::FinTimesFin)
    return WitnessIntervals::row_coverage().with_certificate(CertRule::RowCoverage, 1, I.name());
  if (!I.lscsm()) throw Error(ErrorCode::NotRepresentable, "ideal " + I.name() + " has neither an lscsm nor a row rule");
  const Lscsm& m = *I.lscsm();
  if (m.kind() == LscsmKind::CountingCap)
    return WitnessIntervals::unit().with_certificate(CertRule::PhiBlock, 1, I.name());
  if (m.kind() == LscsmKind::RunningDensity)
    return WitnessIntervals::geometric(2, q).with_certificate(CertRule::DensityRatio, q, I.name());

  std::vector<std::uint64_t> iota{1};
  while (true) {
    const auto next = next_phi_block(m, iota.back(), q, horizon);
    if (!next) break;
    iota.push_back(*next);
  }
  if (iota.size() < 2)
    throw Error(ErrorCode::BlockSearchExceeded, "no witness block of mass " + to_string(q) + " below the horizon");
  return WitnessIntervals::table(std::move(iota), CertRule::PhiBlock, q).with_certificate(CertRule::PhiBlock, q, I.name());
}

bool block_covers_rows(std::uint64_t lo, std::uint64_t hi_exclusive, std::uint64_t rows) {
  for (std::uint64_t r = 0; r <= rows; ++r) {
    if (r >= 63) return false;
    const std::uint64_t p = std::uint64_t{1} << r;
    std::uint64_t c = (lo + p - 1) / p;
    if (c % 2 == 0) ++c;
    if (c > kNoLimit / p || c * p >= hi_exclusive) return false;
  }
  return true;
}

CertificationReport certify_witness(const IdealHandle& I, const WitnessIntervals& w, std::uint64_t horizon) {
  CertificationReport rep;
  bool first = true;
  for (std::uint64_t n = 1;; ++n) {
    const auto lo = w.iota(n);
    const auto hi = w.iota(n + 1);
    if (!lo || !hi || *hi - 1 > horizon) break;
    Rational mass;
    bool ok = false;
    switch (w.rule()) {
      case CertRule::DensityRatio:
        mass = Rational(BigInt(*hi - *lo), BigInt(*hi));
        ok = mass >= w.q0();
        break;
      case CertRule::PhiBlock:
        if (!I.lscsm()) throw Error(ErrorCode::NotRepresentable, "phi-block witness needs an lscsm");
        mass = I.lscsm()->phi_interval_lower(*lo, *hi - 1);
        ok = mass >= w.q0();
        break;
      case CertRule::RowCoverage:
        mass = 1;
        ok = block_covers_rows(*lo, *hi, n);
        break;
    }
    ++rep.blocks_checked;
    if (first || mass < rep.min_mass) rep.min_mass = mass;
    first = false;
    if (!ok && rep.ok) {
      rep.ok = false;
      rep.failing_block = n;
    }
  }
  return rep;
}

Tri fk_holds(const WitnessIntervals& w, const NatSet& s, std::uint64_t k, std::uint64_t horizon) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "fk_holds needs k >= 1");
  if (eventually_all_ones(s)) return Tri::False;
  if (s.kind() == SetKind::BlockUnion && s.witness() == w && s.selector().is_infinite() == Tri::True) return Tri::False;

  const std::uint64_t H = std::min(horizon, s.decidable_limit());
  std::uint64_t nu = k;
  if (H >= 1) {
    // Scan the blocks that end within the horizon.
    std::uint64_t last_end = 0;
    for (std::uint64_t n = k;; ++n) {
      const auto hi = w.iota(n + 1);
      if (!hi || *hi - 1 > H) break;
      last_end = *hi - 1;
    }
    if (last_end > 0) {
      const Bits bits = s.prefix(last_end);
      for (std::uint64_t n = k;; ++n) {
        const auto lo = w.iota(n);
        const auto hi = w.iota(n + 1);
        if (!lo || !hi || *hi - 1 > last_end) break;
        const bool contained = std::all_of(bits.begin() + static_cast<std::ptrdiff_t>(*lo - 1),
                                           bits.begin() + static_cast<std::ptrdiff_t>(*hi - 1),
                                           [](std::uint8_t b) { return b != 0; });
        if (contained) return Tri::False;
        nu = n + 1;
      }
    }
  }
  return certifies(w, s, nu) ? Tri::True : Tri::Unknown;
}

std::vector<NatSet> sample_members(const IdealHandle& I, const WitnessIntervals& w, std::uint64_t count,
                                   std::uint64_t K, std::uint64_t seed) {
  Rng rng(Rng::split(seed, 0x5eed));
  const std::uint64_t bound = std::max<std::uint64_t>(1, w.iota(K).value_or(2) - 1);
  const bool fin = I.lscsm() && I.lscsm()->kind() == LscsmKind::CountingCap;
  const bool fxf = I.special_rule() == SpecialRule::FinTimesFin;
  std::vector<NatSet> out;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::vector<std::uint64_t> elems;
    const std::uint64_t sz = rng.range(0, 6);
    for (std::uint64_t j = 0; j < sz; ++j) elems.push_back(rng.range(1, std::min<std::uint64_t>(bound, 1000)));
    NatSet fin_part = NatSet::finite(elems);
    if (fin || i % 3 == 0) {
      out.push_back(fin_part);
      continue;
    }
    NatSet structured = NatSet::powers_of(rng.range(2, 5));
    if (fxf && rng.bernoulli(0.5)) {
      // one row: a + j 2^e with nu2(a) < e
      const unsigned e = static_cast<unsigned>(rng.range(1, 4));
      const std::uint64_t r = rng.range(0, e - 1);
      const std::uint64_t a = (std::uint64_t{1} << r) * (2 * rng.range(0, 3) + 1);
      structured = NatSet::progression(a, std::uint64_t{1} << e);
    } else if (!fxf && rng.bernoulli(0.3)) {
      std::vector<std::uint64_t> idx;
      for (std::uint64_t j = 0; j < 3; ++j) idx.push_back(rng.range(1, std::max<std::uint64_t>(1, K - 1)));
      structured = NatSet::block_union(w, BlockSelector::index_set(NatSet::finite(idx)));
    }
    out.push_back(i % 3 == 1 ? structured : NatSet::set_union(fin_part, structured));
  }
  return out;
}

nlohmann::json VerifyReport::to_json() const {
  return nlohmann::json{{"ideal", ideal},
                        {"trials", trials},
                        {"not_in", not_in},
                        {"undecided", undecided},
                        {"min_density_estimate", min_density_estimate},
                        {"min_block_phi", rational_to_json(min_block_phi)},
                        {"rows_required", rows_required},
                        {"row_failures", row_failures},
                        {"members", members},
                        {"members_separated", members_separated},
                        {"cofinite_samples", cofinite_samples},
                        {"cofinite_rejected", cofinite_rejected},
                        {"passed", passed}};
}

namespace {

struct TrialResult {
  Membership verdict = Membership::Undecided;
  double density = 1.0;
  Rational min_phi = 1;
  bool rows_ok = true;
  std::optional<std::string> refuted;
};

TrialResult run_trial(const IdealHandle& I, const WitnessIntervals& w, std::uint64_t horizon, std::uint64_t seed,
                      std::uint64_t rows) {
  TrialResult t;
  Rng rng(seed);
  static constexpr std::uint64_t kSteps[] = {1, 2, 3, 5};
  const std::uint64_t k = kSteps[rng.range(0, 3)];
  const std::uint64_t r = rng.range(1, k);
  std::vector<std::uint64_t> extras;
  for (std::uint64_t j = rng.range(0, 3); j > 0; --j) extras.push_back(rng.range(1, 12));
  std::vector<std::uint64_t> noise;
  for (std::uint64_t j = rng.range(0, 5); j > 0; --j) noise.push_back(rng.range(1, horizon));
  const NatSet idx = NatSet::set_union(NatSet::progression(r, k), NatSet::finite(extras));
  const NatSet sample = NatSet::set_union(NatSet::block_union(w, BlockSelector::index_set(idx)), NatSet::finite(noise));

  MembershipParams p;
  p.horizon = horizon;
  t.verdict = I.decide(sample, p).verdict;
  if (t.verdict == Membership::In) t.refuted = sample.describe();

  const Bits bits = sample.prefix(horizon);
  if (I.special_rule() == SpecialRule::FinTimesFin) {
    std::vector<bool> hit(rows + 1, false);
    for (std::uint64_t i = 1; i <= horizon; ++i)
      if (bits[i - 1] && two_adic_valuation(i) <= rows) hit[two_adic_valuation(i)] = true;
    t.rows_ok = std::all_of(hit.begin(), hit.end(), [](bool b) { return b; });
    return t;
  }
  // Running density at ends of selected blocks late in the horizon.
  const Lscsm& m = *I.lscsm();
  const double root = std::sqrt(static_cast<double>(horizon));
  std::uint64_t count = 0;
  std::uint64_t pos = 0;
  double best = 0;
  bool first_phi = true;
  for (std::uint64_t n = 1;; ++n) {
    const auto lo = w.iota(n);
    const auto hi = w.iota(n + 1);
    if (!lo || !hi || *hi - 1 > horizon) break;
    if (idx.member(n) != Tri::True) continue;
    const std::uint64_t e = *hi - 1;
    for (; pos < e; ++pos) count += bits[pos];
    if (static_cast<double>(*lo) >= root) best = std::max(best, static_cast<double>(count) / static_cast<double>(e));
    const Rational phi = m.phi_interval_lower(*lo, e);
    if (first_phi || phi < t.min_phi) t.min_phi = phi;
    first_phi = false;
    if (phi < w.q0()) t.refuted = "block " + std::to_string(n) + " below certified mass";
  }
  t.density = best;
  return t;
}

}  // namespace

VerifyReport verify_witness(const IdealHandle& I, const WitnessIntervals& w, std::uint64_t trials,
                            std::uint64_t horizon, std::uint64_t seed, std::uint64_t K) {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "verify_witness needs trials >= 1");
  VerifyReport rep;
  rep.ideal = I.name();
  rep.trials = trials;
  rep.rows_required = I.special_rule() == SpecialRule::FinTimesFin ? 10 : 0;

  std::vector<TrialResult> results(trials);
  std::vector<std::string> errors(trials);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(trials); ++i) {
    try {
      results[i] = run_trial(I, w, horizon, Rng::split(seed, static_cast<std::uint64_t>(i)), rep.rows_required);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (std::uint64_t i = 0; i < trials; ++i) {
    if (!errors[i].empty()) throw Error(ErrorCode::WitnessRefuted, "trial " + std::to_string(i) + ": " + errors[i]);
    const auto& t = results[i];
    if (t.refuted) throw Error(ErrorCode::WitnessRefuted, "trial " + std::to_string(i) + ": " + *t.refuted);
    if (t.verdict == Membership::NotIn) ++rep.not_in;
    if (t.verdict == Membership::Undecided) ++rep.undecided;
    rep.min_density_estimate = std::min(rep.min_density_estimate, t.density);
    if (i == 0 || t.min_phi < rep.min_block_phi) rep.min_block_phi = t.min_phi;
    if (!t.rows_ok) ++rep.row_failures;
  }
  if (I.special_rule() == SpecialRule::FinTimesFin) rep.min_density_estimate = 0;

  const std::uint64_t fk_horizon = std::min<std::uint64_t>(horizon, w.iota(K + 1).value_or(horizon));
  for (const auto& s : sample_members(I, w, trials, K, seed)) {
    ++rep.members;
    for (std::uint64_t k = 1; k <= K; ++k) {
      if (fk_holds(w, s, k, fk_horizon) == Tri::True) {
        ++rep.members_separated;
        break;
      }
    }
  }
  Rng rng(Rng::split(seed, 0xc0f1));
  for (std::uint64_t i = 0; i < trials; ++i) {
    std::vector<std::uint64_t> ex;
    for (std::uint64_t j = rng.range(0, 4); j > 0; --j) ex.push_back(rng.range(1, 1000));
    const NatSet s = NatSet::cofinite(ex);
    ++rep.cofinite_samples;
    bool any = false;
    for (std::uint64_t k = 1; k <= K && !any; ++k) any = fk_holds(w, s, k, horizon) != Tri::False;
    if (!any) ++rep.cofinite_rejected;
  }
  rep.passed = rep.not_in == rep.trials && rep.row_failures == 0 && rep.members_separated == rep.members &&
               rep.cofinite_rejected == rep.cofinite_samples &&
               (I.special_rule() == SpecialRule::FinTimesFin || rep.min_block_phi >= w.q0());
  return rep;
}

}  // namespace idealconv
