#include "doctest.h"
#include "support.hpp"

#include "idealconv/error.hpp"
#include "idealconv/ideal.hpp"
#include "idealconv/meagerness.hpp"

using namespace idealconv;
using namespace idealconv::testing;

namespace {

// Row r of a progression a + j d is infinite iff some j < 2^(r+1) lands in it.
std::uint64_t infinite_rows(std::uint64_t a, std::uint64_t d, unsigned max_row) {
  std::uint64_t rows = 0;
  for (unsigned r = 0; r <= max_row; ++r) {
    for (std::uint64_t j = 0; j < (std::uint64_t{1} << (r + 1)); ++j) {
      if (two_adic_valuation(a + j * d) == r) {
        ++rows;
        break;
      }
    }
  }
  return rows;
}

}  // namespace

TEST_CASE("builtin registry") {
  for (const auto& n : builtin_names()) CHECK(builtin(n).name() == n);
  CHECK(builtin("Z").name() == "density-zero");
  CHECK_THROWS_AS(builtin("nope"), Error);
  CHECK(builtin("density-zero").analytic_p());
  CHECK_FALSE(builtin("fin-x-fin").analytic_p());
  CHECK(builtin("fin-x-fin").special_rule() == SpecialRule::FinTimesFin);
}

TEST_CASE("exact norms of progressions match running density") {
  const auto rd = Lscsm::running_density().normalized();
  const auto h = Lscsm::harmonic(1).normalized();
  for (std::uint64_t a = 1; a < 10; ++a) {
    for (std::uint64_t d = 1; d < 10; ++d) {
      const NatSet s = NatSet::progression(a, d);
      const auto e = exact_norm(rd, s);
      REQUIRE(e.has_value());
      CHECK(*e == Rational(BigInt(1), BigInt(d)));
      const auto est = norm_estimate(rd, s, 1 << 14);
      CHECK(est.numeric == doctest::Approx(1.0 / static_cast<double>(d)).epsilon(0.02));
      CHECK(exact_norm(h, s) == Rational(1));
    }
  }
  CHECK(exact_norm(rd, NatSet::powers_of(2)) == Rational(0));
  CHECK(exact_norm(rd, NatSet::cofinite({1, 5})) == Rational(1));
  CHECK(exact_norm(rd, NatSet::finite({1, 5})) == Rational(0));
  CHECK(exact_norm(h, NatSet::powers_of(3)) == Rational(0));
}

TEST_CASE("norm estimates are non-increasing in the cut") {
  Rng rng(4);
  const auto rd = Lscsm::running_density().normalized();
  for (int trial = 0; trial < 40; ++trial) {
    const NatSet s = random_tree(rng, 3);
    const auto est = norm_estimate(rd, s, 4096);
    for (std::size_t i = 1; i < est.tail_phi.size(); ++i) CHECK(est.tail_phi[i] <= est.tail_phi[i - 1] + 1e-12);
    CHECK(est.tail_hits == s.count_up_to(4096) - s.count_up_to(2048));
  }
}

TEST_CASE("membership on structured sets") {
  const auto fin = builtin("fin"), z = builtin("density-zero"), sum = builtin("summable");
  const auto evens = NatSet::progression(2, 2), p2 = NatSet::powers_of(2), f = NatSet::finite({1, 2, 3});
  CHECK(fin.decide(f).verdict == Membership::In);
  CHECK(fin.decide(p2).verdict == Membership::NotIn);
  CHECK(z.decide(evens).verdict == Membership::NotIn);
  CHECK(z.decide(p2).verdict == Membership::In);
  CHECK(z.decide(f).path == "exact");
  CHECK(sum.decide(p2).verdict == Membership::In);
  CHECK(sum.decide(evens).verdict == Membership::NotIn);
  const auto g = builtin("gdi");
  CHECK(g.decide(f).verdict == Membership::In);
  CHECK(g.decide(NatSet::all()).verdict == Membership::NotIn);
}

TEST_CASE("numeric path on bitmaps") {
  const auto z = builtin("density-zero");
  Bits dense(1 << 14, 0), sparse(1 << 14, 0);
  for (std::size_t i = 0; i < dense.size(); i += 3) dense[i] = 1;
  for (std::size_t i = 1; i <= dense.size(); i *= 2) sparse[i - 1] = 1;
  const auto d = z.decide(NatSet::bitmap(dense));
  CHECK(d.verdict == Membership::NotIn);
  CHECK(d.path == "numeric");
  const auto s = z.decide(NatSet::bitmap(sparse));
  CHECK(s.verdict == Membership::In);
  const auto fin = builtin("fin");
  CHECK(fin.decide(NatSet::bitmap(dense)).verdict == Membership::NotIn);
  CHECK(fin.decide(NatSet::bitmap(Bits(1 << 14, 0))).verdict == Membership::In);
}

TEST_CASE("ideal membership is hereditary and closed under finite unions") {
  Rng rng(23);
  const auto z = builtin("density-zero");
  for (int trial = 0; trial < 200; ++trial) {
    const NatSet a = random_tree(rng, 2), b = random_tree(rng, 2);
    const auto da = z.decide(a).verdict, db = z.decide(b).verdict;
    const auto du = z.decide(NatSet::set_union(a, b)).verdict;
    const auto di = z.decide(NatSet::set_intersection(a, b)).verdict;
    if (da == Membership::In && db == Membership::In) CHECK(du != Membership::NotIn);
    if (da == Membership::In) CHECK(di != Membership::NotIn);
    if (du == Membership::In) CHECK(da != Membership::NotIn);
  }
}

TEST_CASE("fin-x-fin row rule agrees with row counting on progressions") {
  for (std::uint64_t a = 1; a < 20; ++a) {
    for (std::uint64_t d = 1; d < 40; ++d) {
      const auto v = fin_x_fin_rule(NatSet::progression(a, d));
      const std::uint64_t rows = infinite_rows(a, d, 16);
      if (v == Membership::In) CHECK(rows <= 1);
      if (v == Membership::NotIn) CHECK(rows >= 12);
      CHECK(v != Membership::Undecided);
    }
  }
  CHECK(fin_x_fin_rule(NatSet::powers_of(2)) == Membership::In);
  CHECK(fin_x_fin_rule(NatSet::cofinite({})) == Membership::NotIn);
  CHECK(fin_x_fin_rule(NatSet::finite({4, 8})) == Membership::In);
  CHECK(fin_x_fin_rule(NatSet::block_union(WitnessIntervals::row_coverage(), BlockSelector::all())) ==
        Membership::NotIn);
  CHECK(fin_x_fin_rule(NatSet::bitmap(Bits(10, 1))) == Membership::Undecided);
}

TEST_CASE("witness construction per ideal") {
  const auto wz = build_witness(builtin("density-zero"), Rational(1, 2));
  for (std::uint64_t n = 1; n <= 20; ++n) CHECK(*wz.iota(n) == (std::uint64_t{1} << n));
  CHECK(wz.rule() == CertRule::DensityRatio);
  CHECK(certify_witness(builtin("density-zero"), wz, 1 << 20).ok);
  const auto wf = build_witness(builtin("fin"));
  CHECK(wf.generator() == WitnessGenerator::Unit);
  const auto wr = build_witness(builtin("fin-x-fin"));
  CHECK(wr.generator() == WitnessGenerator::RowCoverage);
  CHECK(certify_witness(builtin("fin-x-fin"), wr, 100000).ok);
  const auto ws = build_witness(builtin("summable"), Rational(1, 2), 1 << 16);
  const auto rs = certify_witness(builtin("summable"), ws, 1 << 16);
  CHECK(rs.ok);
  CHECK(rs.min_mass >= Rational(1, 2));
  const auto wg = build_witness(builtin("gdi"));
  CHECK(certify_witness(builtin("gdi"), wg, 1 << 16).ok);
}

TEST_CASE("row coverage agrees with a direct scan") {
  for (std::uint64_t lo = 1; lo < 60; ++lo) {
    for (std::uint64_t hi = lo + 1; hi < 140; hi += 3) {
      for (std::uint64_t rows = 0; rows < 6; ++rows) {
        bool all = true;
        for (std::uint64_t r = 0; r <= rows && all; ++r) {
          bool hit = false;
          for (std::uint64_t i = lo; i < hi && !hit; ++i) hit = two_adic_valuation(i) == r;
          all = hit;
        }
        CHECK(block_covers_rows(lo, hi, rows) == all);
      }
    }
  }
}

TEST_CASE("fk_holds agrees with block containment") {
  const auto w = build_witness(builtin("density-zero"));
  CHECK(fk_holds(w, NatSet::finite({1, 2, 3}), 1, 1 << 10) == Tri::False);
  CHECK(fk_holds(w, NatSet::finite({1, 2, 3}), 2, 1 << 10) == Tri::True);
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const NatSet s = NatSet::cofinite(random_finite(rng, 4000, 30));
    for (std::uint64_t k = 1; k <= 20; ++k) CHECK(fk_holds(w, s, k, 1 << 20) == Tri::False);
  }
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_finite(rng, 64, 40);
    const NatSet s = NatSet::finite(a);
    for (std::uint64_t k = 1; k <= 8; ++k) {
      bool contained = false;
      for (std::uint64_t n = k; n <= 7; ++n) {
        bool all = true;
        for (std::uint64_t i = *w.iota(n); i < *w.iota(n + 1); ++i) all = all && s.member(i) == Tri::True;
        contained = contained || all;
      }
      CHECK(fk_holds(w, s, k, 1 << 10) == tri(!contained));
    }
  }
}

TEST_CASE("verify_witness passes on small runs") {
  const auto z = builtin("density-zero");
  const auto rep = verify_witness(z, *z.witness(), 10, 1 << 16, 3);
  CHECK(rep.passed);
  CHECK(rep.not_in == rep.trials);
  CHECK(rep.min_density_estimate >= 0.45);
  CHECK(rep.members_separated == rep.members);
  CHECK(rep.cofinite_rejected == rep.cofinite_samples);
  const auto ff = builtin("fin-x-fin");
  const auto rf = verify_witness(ff, *ff.witness(), 10, 100000, 3);
  CHECK(rf.passed);
  CHECK(rf.row_failures == 0);
}
