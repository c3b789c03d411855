#include "idealconv/cluster.hpp"

#include "idealconv/error.hpp"
#include "idealconv/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace idealconv {

namespace {

using i128 = __int128;

// |a - c| <= r, exactly.
bool within_closed(const Frac& a, const Frac& c, const Frac& r) {
  const i128 diff_num = static_cast<i128>(a.num) * c.den - static_cast<i128>(c.num) * a.den;
  const i128 diff_den = static_cast<i128>(a.den) * c.den;
  const i128 lhs = (diff_num < 0 ? -diff_num : diff_num) * r.den;
  return lhs <= static_cast<i128>(r.num) * diff_den;
}

bool within_closed(const Point& a, const Point& c, const Frac& r) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!within_closed(a[i], c[i], r)) return false;
  return true;
}

BigInt floor_of(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  BigInt f = num / den;
  if (f * den > num) f -= 1;
  return f;
}

double rounded(double v) { return std::round(v * 1e9) / 1e9; }

Classification classify_levels(const std::vector<LevelRecord>& levels) {
  bool all_not_in = true;
  for (const auto& l : levels) {
    if (l.verdict == Membership::In) return Classification::NotCluster;
    if (l.verdict != Membership::NotIn) all_not_in = false;
  }
  return all_not_in ? Classification::Cluster : Classification::Undecided;
}

std::vector<Region> regions_for(const Point& c, const AnalysisParams& p) {
  std::vector<Region> r;
  for (const auto& e : p.schedule.eps) r.push_back(Region{c, e, false});
  if (p.cell_level) r.push_back(Region{c, Frac(p.pitch.num, 2 * p.pitch.den), true});
  return r;
}

std::uint64_t effective_horizon(const SequenceSpec& x, const AnalysisParams& p) {
  const std::uint64_t N = std::min(p.horizon, x.defined_to());
  if (N < 2) throw Error(ErrorCode::HorizonExceeded, x.name() + " is not defined far enough for analysis");
  return N;
}

// Shared evaluation context: coordinates are materialized once when the
// sequence offers no exact indicator sets.
struct Context {
  const SequenceSpec& x;
  std::uint64_t N;
  std::vector<Frac> coords;
  // 1-D only: (value, index) sorted by value, for interval lookups.
  std::vector<std::pair<Frac, std::uint64_t>> sorted;

  Context(const SequenceSpec& seq, const AnalysisParams& p) : x(seq), N(effective_horizon(seq, p)) {
    if (x.hook()) return;
    coords = x.materialize(N);
    if (x.dim() != 1) return;
    sorted.reserve(N);
    for (std::uint64_t i = 0; i < N; ++i) sorted.emplace_back(coords[i], i + 1);
    std::sort(sorted.begin(), sorted.end());
  }

  NatSet indicator(const Region& r) const {
    if (x.hook()) {
      if (auto s = x.hook()(r)) return *s;
      return indicator_set(x, r, N);
    }
    if (sorted.empty()) return indicator_set(x, r, N, coords, true);
    const Frac& c = r.center[0];
    const Frac lo = frac_from_rational(c.exact() - r.radius.exact());
    const Frac hi = frac_from_rational(c.exact() + r.radius.exact());
    const auto key = [](const std::pair<Frac, std::uint64_t>& e, const Frac& v) { return e.first < v; };
    // ball: lo < y < hi; cell: lo <= y < hi
    auto first = std::lower_bound(sorted.begin(), sorted.end(), lo, key);
    if (!r.cell)
      while (first != sorted.end() && first->first == lo) ++first;
    const auto last = std::lower_bound(first, sorted.end(), hi, key);
    Bits bits(N, 0);
    for (auto it = first; it != last; ++it) bits[it->second - 1] = 1;
    return NatSet::bitmap(std::move(bits));
  }
};

template <class Eval>
std::vector<CandidateRecord> evaluate(const std::vector<Point>& cands, const AnalysisParams& p, Eval eval) {
  std::vector<CandidateRecord> out(cands.size());
  std::string error;
  std::optional<ErrorCode> code;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(cands.size()); ++i) {
    try {
      auto& rec = out[static_cast<std::size_t>(i)];
      rec.point = cands[static_cast<std::size_t>(i)];
      eval(rec, regions_for(rec.point, p));
    } catch (const Error& e) {
#pragma omp critical
      if (!code) {
        code = e.code();
        error = e.what();
      }
    } catch (const std::exception& e) {
#pragma omp critical
      if (!code) {
        code = ErrorCode::InvalidArgument;
        error = e.what();
      }
    }
  }
  if (code) throw Error(*code, error);
  return out;
}

LevelRecord gamma_level(const NatSet& s, const Region& r, const IdealHandle& I, const MembershipParams& mp) {
  LevelRecord l;
  l.eps = r.radius;
  l.cell = r.cell;
  const MembershipResult m = I.decide(s, mp);
  l.verdict = m.verdict;
  l.path = m.path;
  l.exact = m.exact;
  if (m.estimate) {
    l.numeric = m.estimate->relative.empty() ? 0.0 : m.estimate->relative.back();
    l.tail_hits = m.estimate->tail_hits;
  } else if (m.exact) {
    l.numeric = to_double(*m.exact);
  }
  return l;
}

// ||s||_phi at horizon N: exact when structural, else the smallest relative
// tail mass over the cuts (tail-hit count for the counting submeasure).
std::pair<std::optional<Rational>, double> mass_of(const Lscsm& phi, const NatSet& s, std::uint64_t N,
                                                   std::uint64_t hit_min) {
  if (auto e = exact_norm(phi, s)) return {e, to_double(*e)};
  const std::uint64_t n = std::min(N, s.decidable_limit());
  if (n < 2) return {std::nullopt, 0.0};
  const NormEstimate est = norm_estimate(phi, s, n);
  if (phi.kind() == LscsmKind::CountingCap) return {std::nullopt, est.tail_hits >= hit_min ? 1.0 : 0.0};
  double v = 1.0;
  for (double r : est.relative) v = std::min(v, r);
  if (est.relative.empty()) v = 0.0;
  return {std::nullopt, v};
}

}  // namespace

// ---------------------------------------------------------------- params

RadiusSchedule RadiusSchedule::dyadic(std::size_t K) {
  RadiusSchedule s;
  for (std::size_t k = 1; k <= K; ++k) s.eps.emplace_back(1, std::int64_t{1} << k);
  return s;
}

void RadiusSchedule::validate() const {
  if (eps.empty()) throw Error(ErrorCode::InvalidArgument, "radius schedule is empty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (eps[i].num <= 0) throw Error(ErrorCode::InvalidArgument, "radii must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw Error(ErrorCode::InvalidArgument, "radii must be strictly decreasing");
  }
}

void AnalysisParams::validate() const {
  if (horizon < 2) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 2");
  schedule.validate();
  if (pitch.num <= 0) throw Error(ErrorCode::InvalidArgument, "grid pitch must be positive");
  if (schedule.smallest() < pitch) throw Error(ErrorCode::InvalidArgument, "grid pitch must not exceed the smallest radius");
  if (theta <= 0) throw Error(ErrorCode::InvalidArgument, "theta must be positive");
  for (const auto& q : q_grid)
    if (q <= 0 || q > 1) throw Error(ErrorCode::InvalidArgument, "q must lie in (0, 1]");
}

MembershipParams AnalysisParams::membership() const {
  MembershipParams m;
  m.horizon = horizon;
  m.theta = theta;
  m.hit_min = hit_min;
  return m;
}

nlohmann::json AnalysisParams::to_json() const {
  auto eps = nlohmann::json::array();
  for (const auto& e : schedule.eps) eps.push_back(e.str());
  auto qs = nlohmann::json::array();
  for (const auto& q : q_grid) qs.push_back(to_string(q));
  return {{"horizon", horizon}, {"schedule", eps},      {"pitch", pitch.str()}, {"cell_level", cell_level},
          {"hit_min", hit_min}, {"theta", to_string(theta)}, {"q_grid", qs}};
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::Cluster: return "Cluster";
    case Classification::NotCluster: return "NotCluster";
    case Classification::Undecided: return "Undecided";
  }
  return "?";
}

std::string to_string(ReportMode m) {
  switch (m) {
    case ReportMode::Gamma: return "Gamma";
    case ReportMode::LambdaQ: return "LambdaQ";
    case ReportMode::Lambda: return "Lambda";
    case ReportMode::LimitPoints: return "LimitPoints";
  }
  return "?";
}

std::string to_string(Convergence c) {
  switch (c) {
    case Convergence::Converges: return "Converges";
    case Convergence::Diverges: return "Diverges";
    case Convergence::Undecided: return "Undecided";
  }
  return "?";
}

// ---------------------------------------------------------------- report

std::vector<Point> ClusterReport::cluster_points() const {
  std::vector<Point> out;
  for (const auto& c : candidates)
    if (c.cls == Classification::Cluster) out.push_back(c.point);
  return out;
}

double ClusterReport::undecided_fraction() const {
  if (candidates.empty()) return 0.0;
  std::size_t u = 0;
  for (const auto& c : candidates) u += c.cls == Classification::Undecided;
  return static_cast<double>(u) / static_cast<double>(candidates.size());
}

Classification ClusterReport::classify(const Point& p) const {
  for (const auto& c : candidates)
    if (c.point == p) return c.cls;
  return Classification::Undecided;
}

nlohmann::json ClusterReport::to_json() const {
  auto cands = nlohmann::json::array();
  for (const auto& c : candidates) {
    auto levels = nlohmann::json::array();
    for (const auto& l : c.levels) {
      levels.push_back({{"eps", l.eps.str()},
                        {"cell", l.cell},
                        {"verdict", to_string(l.verdict)},
                        {"path", l.path},
                        {"exact", l.exact ? nlohmann::json(to_string(*l.exact)) : nlohmann::json(nullptr)},
                        {"numeric", rounded(l.numeric)},
                        {"tail_hits", l.tail_hits}});
    }
    cands.push_back({{"point", point_to_json(c.point)}, {"class", to_string(c.cls)}, {"levels", levels}});
  }
  auto clusters = nlohmann::json::array();
  for (const auto& p : cluster_points()) clusters.push_back(point_to_json(p));
  return {{"mode", to_string(mode)},
          {"q", q ? nlohmann::json(to_string(*q)) : nlohmann::json(nullptr)},
          {"sequence", sequence},
          {"ideal", ideal},
          {"candidates", cands},
          {"cluster_points", clusters},
          {"undecided_fraction", rounded(undecided_fraction())}};
}

std::string ClusterReport::to_csv() const {
  std::ostringstream os;
  os << "candidate,eps,exact,numeric,class\n";
  for (const auto& c : candidates) {
    for (const auto& l : c.levels) {
      os << '"' << to_string(c.point) << "\"," << (l.cell ? "cell:" : "") << l.eps.str() << ','
         << (l.exact ? to_string(*l.exact) : "") << ',' << rounded(l.numeric) << ',' << to_string(c.cls) << '\n';
    }
  }
  return os.str();
}

// ---------------------------------------------------------------- candidates

std::vector<Point> candidate_points(const SequenceSpec& x, const AnalysisParams& p) {
  p.validate();
  if (x.alphabet()) {
    std::set<Point> letters(x.alphabet()->letters.begin(), x.alphabet()->letters.end());
    return {letters.begin(), letters.end()};
  }
  const std::uint64_t N = effective_horizon(x, p);
  const auto coords = x.materialize(N);
  const std::size_t d = x.dim();
  const Rational delta = p.pitch.exact();
  const Rational bound = x.bound().exact();
  const BigInt jmax = floor_of(bound / delta);
  std::set<std::vector<std::int64_t>> cells;
  for (std::uint64_t n = N / 2 + 1; n <= N; ++n) {
    // The grid cell [j delta - delta/2, j delta + delta/2) holding x_n.
    std::vector<std::int64_t> idx(d);
    bool inside = true;
    for (std::size_t c = 0; c < d && inside; ++c) {
      const BigInt j = floor_of(coords[(n - 1) * d + c].exact() / delta + Rational(1, 2));
      inside = j >= -jmax && j <= jmax;
      if (inside) idx[c] = static_cast<std::int64_t>(j);
    }
    if (inside) cells.insert(idx);
  }
  std::vector<Point> out;
  out.reserve(cells.size());
  for (const auto& idx : cells) {
    Point pt;
    for (auto j : idx) pt.push_back(Frac(j * p.pitch.num, p.pitch.den));
    out.push_back(std::move(pt));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------- estimators

ClusterReport limit_points_estimate(const SequenceSpec& x, const AnalysisParams& p,
                                    const std::vector<Point>& candidates) {
  p.validate();
  const Context ctx(x, p);
  ClusterReport rep;
  rep.mode = ReportMode::LimitPoints;
  rep.sequence = x.name();
  rep.ideal = "fin";
  rep.candidates = evaluate(candidates, p, [&](CandidateRecord& rec, const std::vector<Region>& regions) {
    for (const auto& r : regions) {
      const NatSet s = ctx.indicator(r);
      LevelRecord l;
      l.eps = r.radius;
      l.cell = r.cell;
      const Tri inf = s.is_infinite();
      if (inf != Tri::Unknown) {
        l.path = "exact";
        l.exact = Rational(inf == Tri::True ? 1 : 0);
        l.numeric = inf == Tri::True ? 1.0 : 0.0;
        l.verdict = inf == Tri::True ? Membership::NotIn : Membership::In;
      } else {
        const std::uint64_t n = std::min(ctx.N, s.decidable_limit());
        l.path = "numeric";
        l.tail_hits = s.count_up_to(n) - s.count_up_to(n / 2);
        l.numeric = static_cast<double>(l.tail_hits) / static_cast<double>(n - n / 2);
        if (l.tail_hits >= p.hit_min) l.verdict = Membership::NotIn;
        else if (l.tail_hits == 0) l.verdict = Membership::In;
      }
      rec.levels.push_back(std::move(l));
    }
    rec.cls = classify_levels(rec.levels);
  });
  return rep;
}

ClusterReport limit_points_estimate(const SequenceSpec& x, const AnalysisParams& p) {
  return limit_points_estimate(x, p, candidate_points(x, p));
}

ClusterReport gamma_estimate(const SequenceSpec& x, const IdealHandle& I, const AnalysisParams& p,
                             const std::vector<Point>& candidates) {
  p.validate();
  const Context ctx(x, p);
  const MembershipParams mp = p.membership();
  ClusterReport rep;
  rep.mode = ReportMode::Gamma;
  rep.sequence = x.name();
  rep.ideal = I.name();
  rep.candidates = evaluate(candidates, p, [&](CandidateRecord& rec, const std::vector<Region>& regions) {
    for (const auto& r : regions) rec.levels.push_back(gamma_level(ctx.indicator(r), r, I, mp));
    rec.cls = classify_levels(rec.levels);
  });
  return rep;
}

ClusterReport gamma_estimate(const SequenceSpec& x, const IdealHandle& I, const AnalysisParams& p) {
  return gamma_estimate(x, I, p, candidate_points(x, p));
}

namespace {

// Gamma classification plus the mass condition at the smallest neighborhood:
// mass >= q, or positive mass (numeric mass >= theta) when q is absent.
ClusterReport mass_report(const SequenceSpec& x, const IdealHandle& I, const std::optional<Rational>& q,
                          const AnalysisParams& p) {
  if (!I.analytic_p()) throw Error(ErrorCode::NotAnalyticP, I.name() + " has no lscsm representation");
  if (q && (*q <= 0 || *q > 1)) throw Error(ErrorCode::InvalidArgument, "q must lie in (0, 1]");
  p.validate();
  const Context ctx(x, p);
  const MembershipParams mp = p.membership();
  const Lscsm& phi = *I.lscsm();
  const double qd = to_double(q ? *q : p.theta);
  ClusterReport rep;
  rep.mode = q ? ReportMode::LambdaQ : ReportMode::Lambda;
  rep.q = q;
  rep.sequence = x.name();
  rep.ideal = I.name();
  rep.candidates = evaluate(candidate_points(x, p), p, [&](CandidateRecord& rec, const std::vector<Region>& regions) {
    NatSet last = NatSet::empty();
    for (const auto& r : regions) {
      last = ctx.indicator(r);
      rec.levels.push_back(gamma_level(last, r, I, mp));
    }
    rec.cls = classify_levels(rec.levels);
    if (rec.cls == Classification::NotCluster) return;
    const auto [ex, num] = mass_of(phi, last, ctx.N, p.hit_min);
    auto& tail = rec.levels.back();
    tail.exact = ex;
    tail.numeric = num;
    const bool below = ex ? (q ? *ex < *q : *ex == 0) : num < qd;
    if (below) rec.cls = Classification::NotCluster;
  });
  return rep;
}

}  // namespace

ClusterReport lambda_q_estimate(const SequenceSpec& x, const IdealHandle& I, const Rational& q,
                                const AnalysisParams& p) {
  return mass_report(x, I, q, p);
}

ClusterReport lambda_estimate(const SequenceSpec& x, const IdealHandle& I, const AnalysisParams& p) {
  return mass_report(x, I, std::nullopt, p);
}

UFrak u_frak(const SequenceSpec& x, const SubsequenceMap& sigma, const Point& ell, const Lscsm& phi,
             const AnalysisParams& p) {
  p.validate();
  const SequenceSpec y = apply(sigma, x);
  const Context ctx(y, p);
  UFrak u;
  for (const auto& r : regions_for(ell, p)) {
    const auto [ex, num] = mass_of(phi, ctx.indicator(r), ctx.N, p.hit_min);
    if (!u.numeric_levels.empty()) {
      const auto& pe = u.exact_levels.back();
      if (ex && pe) u.non_increasing = u.non_increasing && *ex <= *pe;
      else u.non_increasing = u.non_increasing && num <= u.numeric_levels.back() + 1e-9;
    }
    u.exact_levels.push_back(ex);
    u.numeric_levels.push_back(num);
  }
  u.exact = u.exact_levels.back();
  u.numeric = u.numeric_levels.back();
  return u;
}

// ---------------------------------------------------------------- convergence

nlohmann::json ConvergenceResult::to_json() const {
  return {{"verdict", to_string(verdict)},
          {"primary", to_string(primary)},
          {"cross_check", to_string(cross)},
          {"disagreement", disagreement}};
}

ConvergenceResult ideal_convergence_check(const SequenceSpec& x, const IdealHandle& I, const Point& ell,
                                          const AnalysisParams& p) {
  p.validate();
  if (ell.size() != x.dim()) throw Error(ErrorCode::InvalidArgument, "limit candidate has the wrong dimension");
  const Context ctx(x, p);
  const MembershipParams mp = p.membership();
  ConvergenceResult res;

  bool all_in = true;
  bool some_not_in = false;
  for (const auto& e : p.schedule.eps) {
    const NatSet outside = simplify(NatSet::complement(ctx.indicator(Region{ell, e, false})));
    const Membership m = I.decide(outside, mp).verdict;
    all_in = all_in && m == Membership::In;
    some_not_in = some_not_in || m == Membership::NotIn;
  }
  res.primary = some_not_in ? Convergence::Diverges : all_in ? Convergence::Converges : Convergence::Undecided;

  std::vector<Point> cands = candidate_points(x, p);
  if (std::find(cands.begin(), cands.end(), ell) == cands.end()) cands.push_back(ell);
  const ClusterReport g = gamma_estimate(x, I, p, cands);
  const Frac& eK = p.schedule.smallest();
  bool far_cluster = false, far_undecided = false;
  for (const auto& c : g.candidates) {
    if (within_closed(c.point, ell, eK)) continue;
    far_cluster = far_cluster || c.cls == Classification::Cluster;
    far_undecided = far_undecided || c.cls == Classification::Undecided;
  }
  const Classification self = g.classify(ell);
  if (far_cluster || self == Classification::NotCluster) res.cross = Convergence::Diverges;
  else if (self == Classification::Cluster && !far_undecided) res.cross = Convergence::Converges;
  else res.cross = Convergence::Undecided;

  if (res.primary == res.cross) {
    res.verdict = res.primary;
  } else {
    res.verdict = Convergence::Undecided;
    res.disagreement = true;
  }
  return res;
}

}  // namespace idealconv
