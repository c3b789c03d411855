#include "doctest.h"
#include "support.hpp"

#include "idealconv/error.hpp"
#include "idealconv/json_io.hpp"
#include "idealconv/kernels.hpp"
#include "idealconv/lscsm.hpp"
#include "idealconv/natset.hpp"
#include "idealconv/rational.hpp"
#include "idealconv/rng.hpp"
#include "idealconv/witness.hpp"

using namespace idealconv;
using namespace idealconv::testing;

TEST_CASE("frac normalizes and compares exactly") {
  CHECK(Frac(2, 4) == Frac(1, 2));
  CHECK(Frac(-3, -6) == Frac(1, 2));
  CHECK(Frac(1, -2) == Frac(-1, 2));
  CHECK(Frac(1, 3) < Frac(1, 2));
  CHECK(parse_frac("3/4") == Frac(3, 4));
  CHECK(parse_frac("2") == Frac(2));
  CHECK_THROWS_AS(Frac(1, 0), Error);
  CHECK(within_open(Frac(1, 2), Frac(0), Frac(3, 4)));
  CHECK_FALSE(within_open(Frac(1, 2), Frac(0), Frac(1, 2)));
  CHECK(within_cell(Frac(-1, 4), Frac(0), Frac(1, 4)));
  CHECK_FALSE(within_cell(Frac(1, 4), Frac(0), Frac(1, 4)));
  CHECK(parse_rational("-7/4") == make_rational(-7, 4));
  CHECK(to_string(make_rational(6, 4)) == "3/2");
}

TEST_CASE("natset membership agrees with prefix, counts and next_member") {
  Rng rng(11);
  const std::uint64_t N = 300;
  for (int trial = 0; trial < 300; ++trial) {
    const NatSet s = random_tree(rng, 3);
    const Bits b = s.prefix(N);
    std::uint64_t count = 0;
    for (std::uint64_t n = 1; n <= N; ++n) {
      REQUIRE(s.member(n) == tri(b[n - 1]));
      count += b[n - 1];
    }
    CHECK(s.count_up_to(N) == count);
    std::uint64_t from = 1;
    while (from <= N) {
      const auto m = s.next_member(from, N);
      std::uint64_t expect = from;
      while (expect <= N && !b[expect - 1]) ++expect;
      if (expect > N) {
        CHECK_FALSE(m.has_value());
        break;
      }
      REQUIRE(m.has_value());
      CHECK(*m == expect);
      from = *m + 1;
    }
  }
}

TEST_CASE("periodic forms reproduce membership") {
  Rng rng(5);
  int seen = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const NatSet s = random_tree(rng, 2);
    const auto f = s.periodic_form();
    if (!f) continue;
    ++seen;
    for (std::uint64_t n = f->settle; n < f->settle + 3 * f->period + 40; ++n)
      REQUIRE(s.member(n) == tri(f->residues[n % f->period] != 0));
  }
  CHECK(seen > 50);
}

TEST_CASE("natset json round trip is lossless") {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const NatSet s = random_tree(rng, 3);
    const NatSet t = NatSet::from_json(s.to_json());
    CHECK(s == t);
    CHECK(dump_canonical(s.to_json()) == dump_canonical(t.to_json()));
  }
}

TEST_CASE("bitmaps are undecided beyond their horizon") {
  const NatSet s = NatSet::bitmap(Bits{0, 1, 0, 1});
  CHECK(s.member(2) == Tri::True);
  CHECK(s.member(5) == Tri::Unknown);
  CHECK(s.decidable_limit() == 4);
  CHECK_THROWS_AS(s.prefix(8), Error);
  CHECK_THROWS_AS(s.next_member(5, 10), Error);
  CHECK(NatSet::interval(3, 5).count_up_to(100) == 3);
  CHECK(NatSet::interval(5, 3).is_infinite() == Tri::False);
  CHECK(NatSet::powers_of(2).is_infinite() == Tri::True);
  CHECK(NatSet::complement(NatSet::all()).is_infinite() == Tri::False);
}

TEST_CASE("witness generators") {
  const auto g = WitnessIntervals::geometric(2, Rational(1, 2));
  for (std::uint64_t n = 1; n <= 40; ++n) CHECK(*g.iota(n) == (std::uint64_t{1} << n));
  const auto r = WitnessIntervals::row_coverage();
  CHECK(*r.iota(1) == 1);
  for (std::uint64_t n = 1; n <= 20; ++n) CHECK(*r.iota(n + 1) == *r.iota(n) + (std::uint64_t{1} << (n + 1)));
  const auto u = WitnessIntervals::unit();
  CHECK(*u.iota(17) == 17);
  CHECK_FALSE(u.lengths_grow());
  CHECK(g.lengths_grow());
  for (std::uint64_t i = 2; i < 5000; i += 7) {
    const auto b = g.block_of(i);
    REQUIRE(b.has_value());
    CHECK(*g.iota(*b) <= i);
    CHECK(i < *g.iota(*b + 1));
  }
  CHECK(*g.block_of(1) == 0);
  const auto t = WitnessIntervals::table({1, 3, 7}, CertRule::PhiBlock, Rational(1, 2));
  CHECK(t.known_blocks() == 2);
  CHECK_FALSE(t.iota(4).has_value());
  CHECK_FALSE(t.block_of(9).has_value());
  CHECK(witness_from_json(witness_to_json(t)) == t);
  CHECK(witness_from_json(witness_to_json(g)) == g);
}

TEST_CASE("serial and parallel kernels agree") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = rng.range(1, 5000);
    Bits a(n), b(n);
    for (auto& x : a) x = rng.bernoulli(0.3);
    for (auto& x : b) x = rng.bernoulli(0.6);
    CHECK(kernels::serial::popcount(a) == kernels::parallel::popcount(a));
    Bits s1 = a, p1 = a;
    kernels::serial::or_into(s1, b);
    kernels::parallel::or_into(p1, b);
    CHECK(s1 == p1);
    kernels::serial::and_into(s1, a);
    kernels::parallel::and_into(p1, a);
    CHECK(s1 == p1);
    kernels::serial::flip(s1);
    kernels::parallel::flip(p1);
    CHECK(s1 == p1);
    const std::uint64_t cut = rng.range(0, n - 1);
    const auto rs = kernels::serial::tail_running_density(a, cut, n);
    const auto rp = kernels::parallel::tail_running_density(a, cut, n);
    CHECK(rs.count == rp.count);
    CHECK(rs.n == rp.n);
    Rational best = 0;
    std::uint64_t c = 0;
    for (std::uint64_t m = cut + 1; m <= n; ++m) {
      c += a[m - 1];
      best = std::max(best, Rational(BigInt(c), BigInt(m)));
    }
    CHECK(rs.value() == best);
  }
  std::vector<Frac> coords;
  for (int i = 0; i < 400; ++i) coords.push_back(Frac(static_cast<std::int64_t>(rng.range(0, 64)), 64));
  const PointBlock pts{1, coords};
  const std::vector<Frac> centers{Frac(1, 2), Frac(0), Frac(3, 4)};
  for (const auto& c : centers) {
    const std::vector<Frac> cv{c};
    CHECK(kernels::serial::ball_hits(pts, cv, Frac(1, 8)) == kernels::parallel::ball_hits(pts, cv, Frac(1, 8)));
    CHECK(kernels::serial::cell_hits(pts, cv, Frac(1, 8)) == kernels::parallel::cell_hits(pts, cv, Frac(1, 8)));
  }
  CHECK(kernels::serial::window_counts(pts, centers, Frac(1, 16), 100, 400) ==
        kernels::parallel::window_counts(pts, centers, Frac(1, 16), 100, 400));
}

TEST_CASE("rng draws are reproducible") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng c(1);
  for (int i = 0; i < 1000; ++i) {
    const auto g = c.geometric(0.5);
    CHECK(g >= 1);
    const auto r = c.range(3, 9);
    CHECK(r >= 3);
    CHECK(r <= 9);
  }
  CHECK(Rng::split(7, 1) != Rng::split(7, 2));
}

namespace {

std::vector<Lscsm> variants() {
  return {Lscsm::running_density().normalized(), Lscsm::counting_cap().normalized(),
          Lscsm::harmonic(1).normalized(),
          Lscsm::density_family(BlockPartition::doubling(), {Rational(1), Rational(1, 2)}).normalized(),
          Lscsm::weighted_table({Rational(1, 2), Rational(1, 3), Rational(1, 4), Rational(1, 5)}, Rational(1))};
}

Rational brute_density_family(const std::vector<std::uint64_t>& a, const Lscsm& m) {
  Rational best = 0;
  for (std::uint64_t n = 1; n < 12; ++n) {
    const auto [lo, hi] = m.blocks().block(n);
    const auto c = std::count_if(a.begin(), a.end(), [&](std::uint64_t x) { return x >= lo && x < hi; });
    best = std::max(best, m.weights()[(n - 1) % m.weights().size()] * Rational(BigInt(c), BigInt(hi - lo)));
  }
  return m.scale() * best;
}

}  // namespace

TEST_CASE("lscsm values match brute-force definitions") {
  Rng rng(17);
  const auto rd = Lscsm::running_density().normalized();
  const auto h = Lscsm::harmonic(2).normalized();
  const auto df = Lscsm::density_family(BlockPartition::doubling(), {Rational(1), Rational(1, 3)}).normalized();
  const auto cc = Lscsm::counting_cap();
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_finite(rng, 1000, 30);
    CHECK(rd.phi_finite(a) == brute_running_density(a));
    CHECK(h.phi_finite(a) == brute_harmonic(a, 2));
    CHECK(df.phi_finite(a) == brute_density_family(a, df));
    CHECK(cc.phi_finite(a) == (a.empty() ? Rational(0) : Rational(1)));
    CHECK(rd.phi(NatSet::finite(a), 1000) == rd.phi_finite(a));
    CHECK(h.phi(NatSet::finite(a), 1000) == h.phi_finite(a));
    CHECK(df.phi(NatSet::finite(a), 1000) == df.phi_finite(a));
  }
}

TEST_CASE("lscsm intervals and tail masses") {
  for (const auto& m : variants()) {
    for (std::uint64_t lo = 1; lo < 40; lo += 3) {
      for (std::uint64_t hi = lo; hi < 90; hi += 5) {
        std::vector<std::uint64_t> iv;
        for (std::uint64_t i = lo; i <= hi; ++i) iv.push_back(i);
        CHECK(m.phi_interval(lo, hi) == m.phi_finite(iv));
        CHECK(m.phi_interval_lower(lo, hi) <= m.phi_interval(lo, hi));
      }
    }
    const Bits ones(500, 1);
    for (std::uint64_t t : {0, 10, 250, 499}) CHECK(m.phi_tail_double(ones, t, 500) == doctest::Approx(m.phi_full_tail_double(t, 500)));
  }
  const auto h = Lscsm::harmonic(100);
  const Rational exact = h.phi_interval(10, 1500);
  const Rational lower = h.phi_interval_lower(10, 1500);
  CHECK(lower <= exact);
  CHECK(to_double(lower) > 0.999 * to_double(exact));
  double sum = 0;
  for (std::uint64_t a = 1000; a <= 4000000; ++a) sum += 1.0 / static_cast<double>(a);
  const double long_lower = to_double(h.phi_interval_lower(1000, 4000000));
  CHECK(long_lower <= sum * (1 + 1e-12));
  CHECK(long_lower > 0.999 * sum);
}

TEST_CASE("submeasure axioms on random pairs") {
  Rng rng(2024);
  for (const auto& m : variants()) {
    CHECK(m.phi_finite(std::vector<std::uint64_t>{}) == 0);
    for (int trial = 0; trial < 300; ++trial) {
      const auto a = random_finite(rng, 256, 24);
      const auto b = random_finite(rng, 256, 24);
      const auto u = set_union(a, b);
      const Rational pa = m.phi_finite(a), pb = m.phi_finite(b), pu = m.phi_finite(u);
      CHECK(pu <= pa + pb);
      CHECK(pa <= pu);
      CHECK(pb <= pu);
    }
  }
}

TEST_CASE("block partitions") {
  const auto p = BlockPartition::doubling();
  for (std::uint64_t n = 1; n < 20; ++n) {
    const auto [lo, hi] = p.block(n);
    CHECK(lo == (std::uint64_t{1} << (n - 1)));
    CHECK(hi == 2 * lo);
    CHECK(p.block_of(lo) == n);
    CHECK(p.block_of(hi - 1) == n);
  }
  CHECK_THROWS_AS(Lscsm::density_family(BlockPartition{{2, 3}}, {Rational(1)}), Error);
  CHECK_THROWS_AS(Lscsm::harmonic(0), Error);
  CHECK_THROWS_AS(Lscsm::weighted_table({}, Rational(1)).normalized(), Error);
}
