#include "idealconv/builders.hpp"

#include "idealconv/error.hpp"
#include "idealconv/json_io.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <set>

namespace idealconv {

namespace {

constexpr std::uint64_t kDenseUsed = std::uint64_t{1} << 26;

// Increasing enumeration of a set of indices below a value limit.
class Supply {
 public:
  virtual ~Supply() = default;
  // Smallest member >= from, nullopt when none exists below the limit.
  virtual std::optional<std::uint64_t> next(std::uint64_t from) const = 0;
};

class SetSupply final : public Supply {
 public:
  SetSupply(NatSet s, std::uint64_t limit) : s_(std::move(s)), limit_(std::min(limit, s_.decidable_limit())) {}
  std::optional<std::uint64_t> next(std::uint64_t from) const override { return s_.next_member(from, limit_); }

 private:
  NatSet s_;
  std::uint64_t limit_;
};

class RegionSupply final : public Supply {
 public:
  RegionSupply(std::shared_ptr<const std::vector<Frac>> coords, std::size_t dim, Region r)
      : coords_(std::move(coords)), dim_(dim), r_(std::move(r)) {}
  std::optional<std::uint64_t> next(std::uint64_t from) const override {
    const std::uint64_t N = coords_->size() / dim_;
    Point y(dim_);
    for (std::uint64_t v = std::max<std::uint64_t>(from, 1); v <= N; ++v) {
      for (std::size_t c = 0; c < dim_; ++c) y[c] = (*coords_)[(v - 1) * dim_ + c];
      if (r_.contains(y)) return v;
    }
    return std::nullopt;
  }

 private:
  std::shared_ptr<const std::vector<Frac>> coords_;
  std::size_t dim_;
  Region r_;
};

// Hit sets {n : x_n in B(c, eps_j)} as supplies, created on demand.
class SupplyFactory {
 public:
  SupplyFactory(const SequenceSpec& x, std::uint64_t value_horizon) : x_(x), vh_(value_horizon) {}

  const Supply& get(const Point& c, const Frac& eps) {
    auto key = std::make_pair(c, eps);
    auto it = cache_.find(key);
    if (it != cache_.end()) return *it->second;
    const Region r{c, eps, false};
    std::unique_ptr<Supply> s;
    if (x_.hook()) {
      if (auto set = x_.hook()(r)) s = std::make_unique<SetSupply>(*set, vh_);
    }
    if (!s) {
      if (!coords_) coords_ = std::make_shared<const std::vector<Frac>>(x_.materialize(std::min(vh_, x_.defined_to())));
      s = std::make_unique<RegionSupply>(coords_, x_.dim(), r);
    }
    return *cache_.emplace(key, std::move(s)).first->second;
  }

 private:
  const SequenceSpec& x_;
  std::uint64_t vh_;
  std::shared_ptr<const std::vector<Frac>> coords_;
  std::map<std::pair<Point, Frac>, std::unique_ptr<Supply>> cache_;
};

// Used values: a bitmap below 2^26, an ordered set above.
class UsedSet {
 public:
  bool contains(std::uint64_t v) const {
    if (v < kDenseUsed) return v < dense_.size() && dense_[v];
    return sparse_.count(v) != 0;
  }
  void insert(std::uint64_t v) {
    if (v < kDenseUsed) {
      if (v >= dense_.size()) dense_.resize(std::max<std::size_t>(v + 1, dense_.size() * 2), 0);
      dense_[v] = 1;
    } else {
      sparse_.insert(v);
    }
    while (contains(low_)) ++low_;
  }
  std::uint64_t lowest_unused() const { return low_; }

 private:
  std::vector<std::uint8_t> dense_;
  std::set<std::uint64_t> sparse_;
  std::uint64_t low_ = 1;
};

// block k -> supply (nullptr: unassigned); throws on unknown selection.
using Assign = std::function<const Supply*(std::uint64_t)>;

struct Filled {
  std::vector<std::uint64_t> table;
  std::uint64_t blocks = 0;    // complete blocks
  std::uint64_t assigned = 0;  // complete blocks that drew from a supply
};

Filled fill_sigma(const WitnessIntervals& w, const Assign& assign, const BuildParams& bp) {
  Filled f;
  std::uint64_t prev = 0;
  const auto i1 = w.iota(1);
  if (!i1) return f;
  for (std::uint64_t n = 1; n < *i1; ++n) f.table.push_back(++prev);
  std::size_t keep = f.table.size();
  for (std::uint64_t k = 1;; ++k) {
    const auto lo = w.iota(k);
    const auto hi = w.iota(k + 1);
    if (!lo || !hi || *hi - 1 > bp.max_table) break;
    const Supply* sup = assign(k);
    bool ok = true;
    for (std::uint64_t n = *lo; n < *hi; ++n) {
      std::optional<std::uint64_t> v;
      if (sup) v = sup->next(prev + 1);
      else if (prev + 1 <= bp.value_horizon) v = prev + 1;
      if (!v || *v > bp.value_horizon) {
        ok = false;
        break;
      }
      f.table.push_back(*v);
      prev = *v;
    }
    if (!ok) break;
    keep = f.table.size();
    f.blocks = k;
    f.assigned += sup != nullptr;
  }
  f.table.resize(keep);
  return f;
}

Filled fill_pi(const WitnessIntervals& w, const Assign& assign, const BuildParams& bp) {
  Filled f;
  UsedSet used;
  std::map<const Supply*, std::uint64_t> cursor;  // all members below are used
  const auto i1 = w.iota(1);
  if (!i1) return f;
  auto take_free = [&]() -> std::optional<std::uint64_t> {
    const std::uint64_t v = used.lowest_unused();
    if (v > bp.value_horizon) return std::nullopt;
    return v;
  };
  auto take_from = [&](const Supply& s) -> std::optional<std::uint64_t> {
    std::uint64_t& c = cursor.try_emplace(&s, 1).first->second;
    auto v = s.next(c);
    while (v && used.contains(*v)) v = s.next(*v + 1);
    if (!v || *v > bp.value_horizon) return std::nullopt;
    c = *v + 1;
    return v;
  };
  for (std::uint64_t n = 1; n < *i1; ++n) {
    const auto v = take_free();
    if (!v) return f;
    f.table.push_back(*v);
    used.insert(*v);
  }
  std::size_t keep = f.table.size();
  for (std::uint64_t k = 1;; ++k) {
    const auto lo = w.iota(k);
    const auto hi = w.iota(k + 1);
    if (!lo || !hi || *hi - 1 > bp.max_table) break;
    const Supply* sup = assign(k);
    bool ok = true;
    for (std::uint64_t n = *lo; n < *hi; ++n) {
      const auto v = sup ? take_from(*sup) : take_free();
      if (!v) {
        ok = false;
        break;
      }
      f.table.push_back(*v);
      used.insert(*v);
    }
    if (!ok) break;
    keep = f.table.size();
    f.blocks = k;
    f.assigned += sup != nullptr;
  }
  f.table.resize(keep);
  return f;
}

Assign selector_assign(const BlockSelector& sel, const Supply& s) {
  return [&sel, &s](std::uint64_t k) -> const Supply* {
    const Tri t = sel.selects(k);
    if (t == Tri::Unknown) throw Error(ErrorCode::HorizonExceeded, "block selector undecided at " + std::to_string(k));
    return t == Tri::True ? &s : nullptr;
  };
}

void require_infinite(const NatSet& A) {
  if (A.is_infinite() == Tri::False)
    throw Error(ErrorCode::ExhaustedA, "A is finite; generic constructions need an infinite set");
}

template <class ValueAt>
BlockAudit audit_blocks(std::uint64_t m, ValueAt value, const NatSet& A, const WitnessIntervals& w,
                        const BlockSelector& sel) {
  BlockAudit a;
  a.table_size = m;
  for (std::uint64_t k = 1;; ++k) {
    const auto lo = w.iota(k);
    const auto hi = w.iota(k + 1);
    if (!lo || !hi || *hi - 1 > m) break;
    if (sel.selects(k) != Tri::True) continue;
    ++a.blocks_checked;
    for (std::uint64_t n = *lo; n < *hi; ++n) {
      if (A.member(value(n)) != Tri::True) {
        ++a.failures;
        if (!a.first_failure) a.first_failure = k;
        break;
      }
    }
  }
  return a;
}

std::uint64_t radius_levels(const AnalysisParams& p) { return p.schedule.eps.size(); }

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

// Largest j with |y - c| < eps_j (0 when y is outside the largest ball).
std::uint64_t finest_level(const Point& y, const Point& c, const AnalysisParams& p) {
  std::uint64_t J = 0;
  for (const auto& e : p.schedule.eps) {
    if (!Region{c, e, false}.contains(y)) break;
    ++J;
  }
  return J;
}

bool within_closed(const Point& a, const Point& c, const Frac& r) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    const __int128 dn = static_cast<__int128>(a[i].num) * c[i].den - static_cast<__int128>(c[i].num) * a[i].den;
    const __int128 dd = static_cast<__int128>(a[i].den) * c[i].den;
    if ((dn < 0 ? -dn : dn) * r.den > static_cast<__int128>(r.num) * dd) return false;
  }
  return true;
}

// block_owner[k-1] = candidate index of witness block k.
PreserveAudit audit_preserve(const SequenceSpec& x, const std::vector<std::uint64_t>& table,
                             const WitnessIntervals& w, std::uint64_t blocks, const std::vector<Point>& cands,
                             const std::function<std::size_t(std::uint64_t)>& owner, const AnalysisParams& p,
                             bool check_tail) {
  PreserveAudit a;
  a.table_size = table.size();
  a.blocks_built = blocks;
  a.gamma_x = cands;
  const std::uint64_t m = table.size();
  const std::uint64_t K = radius_levels(p);
  std::vector<Point> pts(m);
  std::string error;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
    try {
      pts[static_cast<std::size_t>(i)] = x.at(table[static_cast<std::size_t>(i)]);
    } catch (const std::exception& e) {
#pragma omp critical
      error = e.what();
    }
  }
  if (!error.empty()) throw Error(ErrorCode::HorizonExceeded, error);

  a.candidates.resize(cands.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t ci = 0; ci < static_cast<std::int64_t>(cands.size()); ++ci) {
    const std::size_t c = static_cast<std::size_t>(ci);
    CandidateCertificate& cert = a.candidates[c];
    cert.point = cands[c];
    cert.levels.resize(K);
    for (std::uint64_t j = 0; j < K; ++j) cert.levels[j].eps = p.schedule.eps[j];
    std::vector<std::uint64_t> cnt(K + 1, 0);  // cnt[j]: hits of level j in the prefix
    std::uint64_t block = 0, block_hi = w.iota(1).value_or(1), block_minJ = K;
    for (std::uint64_t n = 1; n <= m; ++n) {
      if (n == block_hi) {
        ++block;
        block_hi = w.iota(block + 1).value_or(m + 1);
        block_minJ = K;
      }
      const std::uint64_t J = finest_level(pts[n - 1], cands[c], p);
      for (std::uint64_t j = 1; j <= J; ++j) ++cnt[j];
      if (block == 0) continue;
      block_minJ = std::min(block_minJ, J);
      if (n + 1 == block_hi && owner(block) == c) {
        ++cert.blocks_assigned;
        for (std::uint64_t j = 1; j <= block_minJ; ++j) {
          auto& lv = cert.levels[j - 1];
          ++lv.blocks_contained;
          const Rational d(cnt[j], n);
          if (d > lv.best_density) {
            lv.best_density = d;
            lv.best_block = block;
          }
        }
      }
    }
  }

  if (check_tail && m > 0) {
    const Frac& eK = p.schedule.smallest();
    for (std::uint64_t n = m / 2 + 1; n <= m && a.tail_inside; ++n) {
      bool near = false;
      for (const auto& c : cands) near = near || within_closed(pts[n - 1], c, eK);
      a.tail_inside = near;
    }
  }

  const bool ratio_rule = w.rule() == CertRule::DensityRatio;
  for (const auto& cert : a.candidates) {
    bool ok = true;
    for (const auto& lv : cert.levels) ok = ok && lv.blocks_contained > 0 && (!ratio_rule || lv.best_density >= w.q0());
    if (ok) a.gamma_audited.push_back(cert.point);
  }
  a.passed = a.tail_inside && a.gamma_audited.size() == cands.size() && !cands.empty();
  return a;
}

std::vector<Point> check_hypothesis(const SequenceSpec& x, const IdealHandle& I, const AnalysisParams& p) {
  const ClusterReport L = limit_points_estimate(x, p);
  const ClusterReport G = gamma_estimate(x, I, p, candidate_points(x, p));
  if (L.undecided_fraction() > 0 || G.undecided_fraction() > 0)
    throw Error(ErrorCode::HypothesisFailed, "cluster points or limit points undecided at this resolution");
  const auto gl = L.cluster_points();
  const auto gg = G.cluster_points();
  if (gl != gg) {
    std::string msg = "I-cluster points {";
    for (std::size_t i = 0; i < gg.size(); ++i) msg += (i ? ", " : "") + to_string(gg[i]);
    msg += "} differ from limit points {";
    for (std::size_t i = 0; i < gl.size(); ++i) msg += (i ? ", " : "") + to_string(gl[i]);
    throw Error(ErrorCode::HypothesisFailed, msg + "}");
  }
  if (gg.empty()) throw Error(ErrorCode::HypothesisFailed, "no cluster points at this resolution");
  return gg;
}

void require_limit_point(const SequenceSpec& x, const Point& ell, const AnalysisParams& p) {
  const ClusterReport L = limit_points_estimate(x, p, {ell});
  if (L.candidates.at(0).cls != Classification::Cluster)
    throw Error(ErrorCode::NotALimitPoint, to_string(ell) + " is not a limit point at this resolution");
}

template <class Map>
BuildResult<Map> make_result(Map map, PreserveAudit audit) {
  return BuildResult<Map>{std::move(map), std::move(audit)};
}

}  // namespace

// ---------------------------------------------------------------- json

nlohmann::json BlockAudit::to_json() const {
  return {{"blocks_checked", blocks_checked},
          {"failures", failures},
          {"first_failure", first_failure ? nlohmann::json(*first_failure) : nlohmann::json(nullptr)},
          {"table_size", table_size},
          {"ok", ok()}};
}

Rational PreserveAudit::min_best_density() const {
  Rational m = 1;
  for (const auto& c : candidates)
    for (const auto& l : c.levels) m = std::min(m, l.best_density);
  return m;
}

nlohmann::json PreserveAudit::to_json() const {
  auto cands = nlohmann::json::array();
  for (const auto& c : candidates) {
    auto levels = nlohmann::json::array();
    for (const auto& l : c.levels)
      levels.push_back({{"eps", l.eps.str()},
                        {"blocks_contained", l.blocks_contained},
                        {"best_density", to_string(l.best_density)},
                        {"best_block", l.best_block ? nlohmann::json(*l.best_block) : nlohmann::json(nullptr)}});
    cands.push_back({{"point", point_to_json(c.point)}, {"blocks_assigned", c.blocks_assigned}, {"levels", levels}});
  }
  auto pts = [](const std::vector<Point>& v) {
    auto j = nlohmann::json::array();
    for (const auto& p : v) j.push_back(point_to_json(p));
    return j;
  };
  return {{"candidates", cands},
          {"tail_inside", tail_inside},
          {"table_size", table_size},
          {"blocks_built", blocks_built},
          {"bijective", bijective},
          {"gamma_x", pts(gamma_x)},
          {"gamma_audited", pts(gamma_audited)},
          {"min_best_density", to_string(min_best_density())},
          {"passed", passed}};
}

nlohmann::json ExtractionResult::to_json() const {
  auto b = nlohmann::json::array();
  for (const auto& f : blocks)
    b.push_back({{"members", f.members}, {"phi", to_string(f.phi)}, {"eps", f.eps.str()}});
  return {{"tau", tau.to_json()},
          {"blocks", b},
          {"all_within", all_within},
          {"increasing", increasing},
          {"u_recomputed", to_string(u_recomputed)},
          {"valid", valid}};
}

// ---------------------------------------------------------------- generic

SubsequenceMap generic_subsequence(const NatSet& A, const WitnessIntervals& w, const BlockSelector& sel,
                                   const BuildParams& bp) {
  require_infinite(A);
  const SetSupply s(A, bp.value_horizon);
  Filled f = fill_sigma(w, selector_assign(sel, s), bp);
  if (f.assigned == 0) throw Error(ErrorCode::ExhaustedA, "A runs out before the first selected block is filled");
  SubsequenceMap sigma{std::move(f.table), TailKind::Unfinished, 0};
  sigma.validate();
  return sigma;
}

PermutationMap generic_permutation(const NatSet& A, const WitnessIntervals& w, const BlockSelector& sel,
                                   const BuildParams& bp) {
  require_infinite(A);
  if (A == NatSet::progression(2, 2) && w.generator() == WitnessGenerator::Unit &&
      sel.kind() == SelectorKind::IndexSet && sel.indices() == NatSet::progression(1, 2))
    return PermutationMap::swap_odd_even();
  const SetSupply s(A, bp.value_horizon);
  Filled f = fill_pi(w, selector_assign(sel, s), bp);
  if (f.assigned == 0) throw Error(ErrorCode::ExhaustedA, "A runs out before the first selected block is filled");
  return PermutationMap::close_out(std::move(f.table));
}

BlockAudit audit_generic(const SubsequenceMap& sigma, const NatSet& A, const WitnessIntervals& w,
                         const BlockSelector& sel) {
  return audit_blocks(sigma.table.size(), [&](std::uint64_t n) { return sigma.value(n); }, A, w, sel);
}

BlockAudit audit_generic(const PermutationMap& pi, const NatSet& A, const WitnessIntervals& w,
                         const BlockSelector& sel) {
  const std::uint64_t m = pi.rule == PermRule::SwapOddEven ? std::uint64_t{1} << 16 : pi.head.size();
  return audit_blocks(m, [&](std::uint64_t n) { return pi.value(n); }, A, w, sel);
}

// ---------------------------------------------------------------- cluster adding / preserving

namespace {

Assign adding_assign(SupplyFactory& f, const Point& ell, const AnalysisParams& p) {
  const std::uint64_t K = radius_levels(p);
  return [&f, ell, &p, K](std::uint64_t k) -> const Supply* {
    const std::uint64_t j = std::min(ceil_div(k, 2), K);
    return &f.get(ell, p.schedule.eps[j - 1]);
  };
}

Assign preserving_assign(SupplyFactory& f, const std::vector<Point>& cands, const AnalysisParams& p) {
  const std::uint64_t K = radius_levels(p);
  const std::uint64_t L = cands.size();
  return [&f, &cands, &p, K, L](std::uint64_t k) -> const Supply* {
    const std::uint64_t j = std::max<std::uint64_t>(1, std::min(ceil_div(k, L), K));
    return &f.get(cands[k % L], p.schedule.eps[j - 1]);
  };
}

void require_witness_for(const IdealHandle& I, const WitnessIntervals& w) {
  if (!w.iota(2)) throw Error(ErrorCode::InvalidArgument, "witness for " + I.name() + " has fewer than one block");
}

}  // namespace

BuildResult<SubsequenceMap> cluster_adding_sigma(const SequenceSpec& x, const Point& ell, const IdealHandle& I,
                                                 const WitnessIntervals& w, const AnalysisParams& p,
                                                 const BuildParams& bp) {
  p.validate();
  require_witness_for(I, w);
  require_limit_point(x, ell, p);
  SupplyFactory f(x, bp.value_horizon);
  Filled filled = fill_sigma(w, adding_assign(f, ell, p), bp);
  if (filled.assigned == 0) throw Error(ErrorCode::NotALimitPoint, "no witness block could be filled near " + to_string(ell));
  SubsequenceMap sigma{std::move(filled.table), TailKind::Unfinished, 0};
  sigma.validate();
  auto audit = audit_preserve(x, sigma.table, w, filled.blocks, {ell}, [](std::uint64_t) { return 0; }, p, false);
  return make_result(std::move(sigma), std::move(audit));
}

BuildResult<PermutationMap> cluster_adding_pi(const SequenceSpec& x, const Point& ell, const IdealHandle& I,
                                              const WitnessIntervals& w, const AnalysisParams& p,
                                              const BuildParams& bp) {
  p.validate();
  require_witness_for(I, w);
  require_limit_point(x, ell, p);
  SupplyFactory f(x, bp.value_horizon);
  Filled filled = fill_pi(w, adding_assign(f, ell, p), bp);
  if (filled.assigned == 0) throw Error(ErrorCode::NotALimitPoint, "no witness block could be filled near " + to_string(ell));
  auto audit = audit_preserve(x, filled.table, w, filled.blocks, {ell}, [](std::uint64_t) { return 0; }, p, false);
  PermutationMap pi = PermutationMap::close_out(std::move(filled.table));
  audit.bijective = pi.audit_bijective(pi.support_end());
  audit.passed = audit.passed && audit.bijective;
  return make_result(std::move(pi), std::move(audit));
}

BuildResult<SubsequenceMap> cluster_preserving_sigma(const SequenceSpec& x, const IdealHandle& I,
                                                     const WitnessIntervals& w, const std::vector<Point>& candidates,
                                                     const AnalysisParams& p, const BuildParams& bp) {
  p.validate();
  require_witness_for(I, w);
  const auto gamma = check_hypothesis(x, I, p);
  const std::vector<Point> cands = candidates.empty() ? gamma : candidates;
  SupplyFactory f(x, bp.value_horizon);
  Filled filled = fill_sigma(w, preserving_assign(f, cands, p), bp);
  SubsequenceMap sigma{std::move(filled.table), TailKind::Unfinished, 0};
  sigma.validate();
  const std::size_t L = cands.size();
  auto audit = audit_preserve(x, sigma.table, w, filled.blocks, cands, [L](std::uint64_t k) { return k % L; }, p, true);
  return make_result(std::move(sigma), std::move(audit));
}

BuildResult<PermutationMap> cluster_preserving_pi(const SequenceSpec& x, const IdealHandle& I,
                                                  const WitnessIntervals& w, const std::vector<Point>& candidates,
                                                  const AnalysisParams& p, const BuildParams& bp) {
  p.validate();
  require_witness_for(I, w);
  const auto gamma = check_hypothesis(x, I, p);
  const std::vector<Point> cands = candidates.empty() ? gamma : candidates;
  SupplyFactory f(x, bp.value_horizon);
  Filled filled = fill_pi(w, preserving_assign(f, cands, p), bp);
  const std::size_t L = cands.size();
  auto audit = audit_preserve(x, filled.table, w, filled.blocks, cands, [L](std::uint64_t k) { return k % L; }, p, true);
  PermutationMap pi = PermutationMap::close_out(std::move(filled.table));
  audit.bijective = pi.audit_bijective(pi.support_end());
  audit.passed = audit.passed && audit.bijective;
  return make_result(std::move(pi), std::move(audit));
}

// ---------------------------------------------------------------- extraction

ExtractionResult limit_witness_extraction(const SequenceSpec& x, const SubsequenceMap& sigma, const Point& ell,
                                          const Rational& q, const Lscsm& phi, const AnalysisParams& p) {
  p.validate();
  if (q <= 0) throw Error(ErrorCode::InvalidArgument, "q must be positive");
  const SequenceSpec y = apply(sigma, x);
  const std::uint64_t N = std::min(p.horizon, y.defined_to());
  SupplyFactory f(y, N);
  ExtractionResult r;
  std::uint64_t after = 0;
  for (std::size_t k = 1; k <= p.schedule.eps.size(); ++k) {
    const Frac& eps = p.schedule.eps[k - 1];
    const Supply& s = f.get(ell, eps);
    PhiAccumulator acc(phi);
    ExtractionBlock b;
    b.eps = eps;
    std::uint64_t from = after + 1;
    while (true) {
      const auto v = s.next(from);
      if (!v) throw Error(ErrorCode::MassUnavailable, "no block F_" + std::to_string(k) + " with phi >= " + to_string(q) +
                                                          " below horizon " + std::to_string(N));
      acc.add(*v);
      b.members.push_back(*v);
      from = *v + 1;
      if (acc.value() >= q) break;
    }
    b.phi = phi.phi_finite(b.members);
    after = b.members.back();
    r.blocks.push_back(std::move(b));
  }
  for (std::size_t k = 0; k < r.blocks.size(); ++k) {
    const auto& b = r.blocks[k];
    if (k > 0 && b.members.front() <= r.blocks[k - 1].members.back()) r.increasing = false;
    for (auto n : b.members) r.all_within = r.all_within && Region{ell, b.eps, false}.contains(y.at(n));
    r.tau.table.insert(r.tau.table.end(), b.members.begin(), b.members.end());
  }
  r.tau.tail = TailKind::Unfinished;
  r.tau.validate();
  // Finite-scale u on the witness index set: each level j is carried by the
  // later blocks restricted to B(l, eps_j).
  std::optional<Rational> u;
  for (std::size_t j = 0; j < p.schedule.eps.size(); ++j) {
    const Region rj{ell, p.schedule.eps[j], false};
    Rational best = 0;
    for (std::size_t k = j; k < r.blocks.size(); ++k) {
      std::vector<std::uint64_t> in;
      for (auto n : r.blocks[k].members)
        if (rj.contains(y.at(n))) in.push_back(n);
      best = std::max(best, phi.phi_finite(in));
    }
    u = u ? std::min(*u, best) : best;
  }
  r.u_recomputed = u.value_or(Rational(0));
  bool masses = true;
  for (const auto& b : r.blocks) masses = masses && b.phi >= q;
  r.valid = r.all_within && r.increasing && masses && r.u_recomputed >= q;
  return r;
}

}  // namespace idealconv
