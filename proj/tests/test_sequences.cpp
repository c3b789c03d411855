#include "doctest.h"
#include "support.hpp"

#include "idealconv/cluster.hpp"
#include "idealconv/error.hpp"
#include "idealconv/sequence.hpp"

#include <numeric>
#include <set>

using namespace idealconv;

namespace {

AnalysisParams small_params() {
  AnalysisParams p;
  p.horizon = 1 << 12;
  p.schedule = RadiusSchedule::dyadic(6);
  p.pitch = Frac(1, 64);
  return p;
}

bool contains(const std::vector<Point>& v, const Point& p) { return std::find(v.begin(), v.end(), p) != v.end(); }

bool subset(const std::vector<Point>& a, const std::vector<Point>& b) {
  return std::all_of(a.begin(), a.end(), [&](const Point& p) { return contains(b, p); });
}

Point pt(std::int64_t n, std::int64_t d = 1) { return Point{Frac(n, d)}; }

}  // namespace

TEST_CASE("rational enumeration lists reduced fractions by denominator") {
  std::vector<Frac> brute{Frac(0), Frac(1)};
  for (std::int64_t d = 2; brute.size() < 2000; ++d)
    for (std::int64_t n = 1; n < d; ++n)
      if (std::gcd(n, d) == 1) brute.push_back(Frac(n, d));
  for (std::uint64_t i = 0; i < 2000; ++i) CHECK(rational_enumeration(i + 1) == brute[i]);
}

TEST_CASE("indicator sets match a direct scan") {
  const std::uint64_t N = 2000;
  for (const std::string name : {"char:evens", "char:odds", "char:powers2", "harmonic", "rationals", "cycle:5"}) {
    const auto x = sequence_from_name(name);
    x.validate(N);
    for (const auto& c : {Frac(0), Frac(1), Frac(1, 3), Frac(1, 2)}) {
      for (const auto& r : {Frac(1, 2), Frac(1, 8), Frac(1, 100)}) {
        for (bool cell : {false, true}) {
          const Region reg{Point{c}, r, cell};
          const NatSet s = indicator_set(x, reg, N);
          for (std::uint64_t n = 1; n <= N; ++n) REQUIRE(s.member(n) == tri(reg.contains(x.at(n))));
        }
      }
    }
  }
}

TEST_CASE("sequence parsing") {
  CHECK_THROWS_AS(sequence_from_name("nope"), Error);
  CHECK_THROWS_AS(sequence_from_name("cycle:0"), Error);
  CHECK_THROWS_AS(sequence_from_name("alphabet:{bad"), Error);
  const auto x = sequence_from_name(R"(alphabet:{"letters":[0,"1/2"],"sets":[{"kind":"progression","first":1,"step":2},{"kind":"progression","first":2,"step":2}]})");
  CHECK(x.at(4) == pt(1, 2));
  CHECK(x.at(3) == pt(0));
  const auto c = sequence_from_name("cycle:4");
  CHECK(c.at(6) == pt(1, 2));
  CHECK(c.at(8) == pt(0));
}

TEST_CASE("analysis parameters validate") {
  AnalysisParams p;
  CHECK_NOTHROW(p.validate());
  p.pitch = Frac(0);
  CHECK_THROWS_AS(p.validate(), Error);
  p = AnalysisParams{};
  p.schedule.eps = {Frac(1, 4), Frac(1, 2)};
  CHECK_THROWS_AS(p.validate(), Error);
  p = AnalysisParams{};
  p.horizon = 0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("candidates are letters or occupied grid cells") {
  const auto p = small_params();
  const auto ev = candidate_points(sequence_from_name("char:evens"), p);
  CHECK(ev == std::vector<Point>{pt(0), pt(1)});
  const auto h = candidate_points(sequence_from_name("harmonic"), p);
  CHECK(h == std::vector<Point>{pt(0)});
  const auto r = candidate_points(sequence_from_name("rationals"), p);
  std::set<std::int64_t> cells;
  for (std::uint64_t n = p.horizon / 2 + 1; n <= p.horizon; ++n) {
    const Frac v = rational_enumeration(n);
    cells.insert((2 * v.num * 64 + v.den) / (2 * v.den));  // floor(64 v + 1/2)
  }
  REQUIRE(r.size() == cells.size());
  std::size_t i = 0;
  for (auto j : cells) CHECK(r[i++] == pt(j, 64));
}

TEST_CASE("limit points and cluster points of the zoo") {
  const auto p = small_params();
  const auto z = builtin("density-zero");
  const auto pw = sequence_from_name("char:powers2");
  CHECK(limit_points_estimate(pw, p).cluster_points() == std::vector<Point>{pt(0), pt(1)});
  CHECK(gamma_estimate(pw, z, p).cluster_points() == std::vector<Point>{pt(0)});
  const auto h = sequence_from_name("harmonic");
  CHECK(limit_points_estimate(h, p).cluster_points() == std::vector<Point>{pt(0)});
  CHECK(gamma_estimate(h, builtin("fin"), p).cluster_points() == std::vector<Point>{pt(0)});
  const auto ev = sequence_from_name("char:evens");
  const auto lam = lambda_q_estimate(ev, z, Rational(1, 4), p);
  CHECK(lam.cluster_points() == std::vector<Point>{pt(0), pt(1)});
  CHECK(lambda_q_estimate(ev, z, Rational(3, 4), p).cluster_points().empty());
  CHECK(lambda_estimate(ev, z, p).cluster_points() == std::vector<Point>{pt(0), pt(1)});
  CHECK(lambda_estimate(pw, z, p).cluster_points() == std::vector<Point>{pt(0)});
  CHECK(lambda_estimate(h, z, p).cluster_points() == std::vector<Point>{pt(0)});
  CHECK_THROWS_AS(lambda_q_estimate(ev, builtin("fin-x-fin"), Rational(1, 4), p), Error);
}

TEST_CASE("inclusion chain and gamma under fin") {
  const auto p = small_params();
  for (const std::string name : {"char:evens", "char:odds", "char:powers2", "harmonic", "cycle:3", "rationals"}) {
    const auto x = sequence_from_name(name);
    const auto cands = candidate_points(x, p);
    const auto L = limit_points_estimate(x, p, cands).cluster_points();
    CHECK(gamma_estimate(x, builtin("fin"), p, cands).cluster_points() == L);
    for (const std::string ideal : {"fin", "density-zero", "summable"}) {
      const auto I = builtin(ideal);
      const auto G = gamma_estimate(x, I, p, cands).cluster_points();
      CHECK(subset(G, L));
      const auto Lam = lambda_estimate(x, I, p).cluster_points();
      CHECK(subset(Lam, G));
      std::vector<Point> prev;
      for (const auto& q : {Rational(1, 2), Rational(1, 4), Rational(1, 8)}) {
        const auto Lq = lambda_q_estimate(x, I, q, p).cluster_points();
        CHECK(subset(Lq, Lam));
        CHECK(subset(prev, Lq));  // larger q, smaller set
        prev = Lq;
      }
    }
  }
}

TEST_CASE("reports serialize") {
  const auto p = small_params();
  const auto rep = gamma_estimate(sequence_from_name("char:evens"), builtin("density-zero"), p);
  const auto csv = rep.to_csv();
  CHECK(csv.rfind("candidate,eps,exact,numeric,class\n", 0) == 0);
  const auto j = rep.to_json();
  CHECK(j.at("candidates").size() == 2);
  CHECK(rep.undecided_fraction() == 0.0);
  CHECK(rep.classify(pt(1)) == Classification::Cluster);
  CHECK(rep.classify(pt(1, 2)) == Classification::Undecided);
}

TEST_CASE("u_frak of the identity reads the set density") {
  const auto p = small_params();
  const auto rd = *builtin("density-zero").lscsm();
  const auto u = u_frak(sequence_from_name("char:evens"), SubsequenceMap::identity(), pt(1), rd, p);
  REQUIRE(u.exact.has_value());
  CHECK(*u.exact == Rational(1, 2));
  CHECK(u.non_increasing);
  const auto u3 = u_frak(sequence_from_name("cycle:3"), SubsequenceMap::identity(), pt(1, 3), rd, p);
  CHECK(*u3.exact == Rational(1, 3));
  const auto u2 = u_frak(sequence_from_name("char:evens"), SubsequenceMap::arithmetic(2), pt(1), rd, p);
  CHECK(*u2.exact == Rational(1));
}

TEST_CASE("ideal convergence") {
  const auto p = small_params();
  const auto z = builtin("density-zero");
  const auto r1 = ideal_convergence_check(sequence_from_name("char:powers2"), z, pt(0), p);
  CHECK(r1.verdict == Convergence::Converges);
  CHECK(r1.primary == r1.cross);
  const auto r2 = ideal_convergence_check(sequence_from_name("char:powers2"), builtin("fin"), pt(0), p);
  CHECK(r2.verdict == Convergence::Diverges);
  for (const std::string ideal : {"fin", "density-zero"}) {
    const auto r = ideal_convergence_check(sequence_from_name("harmonic"), builtin(ideal), pt(0), p);
    CHECK(r.verdict == Convergence::Converges);
    CHECK_FALSE(r.disagreement);
  }
  CHECK(ideal_convergence_check(sequence_from_name("char:evens"), z, pt(1), p).verdict == Convergence::Diverges);
}
