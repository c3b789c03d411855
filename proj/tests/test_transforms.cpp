#include "doctest.h"
#include "support.hpp"

#include "idealconv/builders.hpp"
#include "idealconv/error.hpp"
#include "idealconv/meagerness.hpp"
#include "idealconv/transforms.hpp"

#include <set>

using namespace idealconv;
using namespace idealconv::testing;

namespace {

AnalysisParams small_params() {
  AnalysisParams p;
  p.horizon = 1 << 12;
  p.schedule = RadiusSchedule::dyadic(6);
  p.pitch = Frac(1, 64);
  return p;
}

Point pt(std::int64_t n, std::int64_t d = 1) { return Point{Frac(n, d)}; }

SubsequenceMap random_affine_sigma(Rng& rng) {
  SubsequenceMap s;
  std::uint64_t v = 0;
  const std::uint64_t m = rng.range(0, 20);
  for (std::uint64_t i = 0; i < m; ++i) s.table.push_back(v += rng.range(1, 4));
  if (rng.range(0, 1) == 0) {
    s.tail = TailKind::ArithmeticTail;
    s.param = static_cast<std::int64_t>(rng.range(1, 4));
  } else {
    s.tail = TailKind::IdentityShift;
    s.param = static_cast<std::int64_t>(v + rng.range(0, 5)) - static_cast<std::int64_t>(m);
  }
  return s;
}

}  // namespace

TEST_CASE("subsequence maps") {
  const auto a = SubsequenceMap::arithmetic(3);
  CHECK(a.value(1) == 3);
  CHECK(a.value(4) == 12);
  const auto sh = SubsequenceMap::shift(2);
  CHECK(sh.value(5) == 7);
  SubsequenceMap u{{2, 5, 9}, TailKind::Unfinished, 0};
  CHECK(u.valid_to() == 3);
  CHECK_FALSE(u.at(4).has_value());
  CHECK_THROWS_AS(u.value(4), Error);
  SubsequenceMap bad{{2, 2}, TailKind::Unfinished, 0};
  CHECK_THROWS_AS(bad.validate(), Error);
  SubsequenceMap seam{{5}, TailKind::IdentityShift, 0};  // sigma(2) = 2 < 5
  CHECK_THROWS_AS(seam.validate(), Error);
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto s = random_affine_sigma(rng);
    CHECK_NOTHROW(s.validate());
    CHECK(SubsequenceMap::from_json(s.to_json()).to_json() == s.to_json());
  }
}

TEST_CASE("permutation maps") {
  const auto sw = PermutationMap::swap_odd_even();
  CHECK(sw.value(1) == 2);
  CHECK(sw.value(2) == 1);
  CHECK(sw.audit_bijective(1000));
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::uint64_t> head;
    std::set<std::uint64_t> used;
    const std::uint64_t m = rng.range(1, 40);
    while (head.size() < m) {
      const auto v = rng.range(1, 120);
      if (used.insert(v).second) head.push_back(v);
    }
    const auto pi = PermutationMap::close_out(head);
    for (std::uint64_t i = 1; i <= m; ++i) CHECK(pi.value(i) == head[i - 1]);
    CHECK(pi.audit_bijective(std::max<std::uint64_t>(pi.support_end(), 200)));
    CHECK(PermutationMap::from_json(pi.to_json()).to_json() == pi.to_json());
    std::set<std::uint64_t> image;
    for (std::uint64_t i = 1; i <= pi.support_end(); ++i) image.insert(pi.value(i));
    CHECK(image.size() == pi.support_end());
    CHECK(*image.rbegin() == pi.support_end());
  }
  CHECK_THROWS_AS(PermutationMap::close_out({1, 1}), Error);
}

TEST_CASE("random maps are valid") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = random_sigma(seed, GapSpec{}, 500);
    CHECK_NOTHROW(s.validate());
    CHECK(s.valid_to() >= 500);
    const auto p = random_pi(seed, 8, 500);
    CHECK(p.audit_bijective(std::max<std::uint64_t>(p.support_end(), 500)));
    CHECK(random_sigma(seed, GapSpec{}, 500).to_json() == s.to_json());
  }
}

TEST_CASE("simplify preserves membership") {
  Rng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const NatSet s = random_tree(rng, 3);
    const NatSet t = simplify(s);
    CHECK(t.depth() <= s.depth());
    for (std::uint64_t n = 1; n <= 300; ++n) REQUIRE(s.member(n) == t.member(n));
  }
  CHECK(simplify(NatSet::progression(1, 1)) == NatSet::all());
  CHECK(simplify(NatSet::complement(NatSet::complement(NatSet::powers_of(3)))) == NatSet::powers_of(3));
  CHECK(simplify(NatSet::set_intersection(NatSet::progression(1, 2), NatSet::progression(2, 2))).is_infinite() == Tri::False);
}

TEST_CASE("preimages agree with pointwise evaluation") {
  Rng rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const auto sigma = random_affine_sigma(rng);
    const NatSet s = random_tree(rng, 2);
    const NatSet pre = preimage(sigma, s, 400);
    for (std::uint64_t n = 1; n <= 100; ++n) REQUIRE(pre.member(n) == s.member(sigma.value(n)));
  }
  for (int trial = 0; trial < 200; ++trial) {
    const auto pi = trial % 5 == 0 ? PermutationMap::swap_odd_even() : random_pi(rng.next(), 6, 60);
    const NatSet s = random_tree(rng, 2);
    const NatSet pre = preimage(pi, s, 400);
    for (std::uint64_t n = 1; n <= 200; ++n) REQUIRE(pre.member(n) == s.member(pi.value(n)));
  }
  SubsequenceMap u{{3, 4, 8}, TailKind::Unfinished, 0};
  const NatSet b = preimage(u, NatSet::progression(2, 2), 100);
  CHECK(b.kind() == SetKind::Bitmap);
  CHECK(b.member(2) == Tri::True);
  CHECK(b.member(4) == Tri::Unknown);
}

TEST_CASE("maps act on sequences") {
  const auto ev = sequence_from_name("char:evens");
  const auto s = apply(SubsequenceMap::arithmetic(2), ev);
  for (std::uint64_t n = 1; n < 50; ++n) CHECK(s.at(n) == pt(1));
  REQUIRE(s.alphabet().has_value());
  CHECK(s.alphabet()->index_sets[0].is_infinite() == Tri::False);
  const auto p = apply(PermutationMap::swap_odd_even(), ev);
  for (std::uint64_t n = 1; n < 50; ++n) CHECK(p.at(n) == ev.at(n % 2 ? n + 1 : n - 1));
  const auto rq = sequence_from_name("rationals");
  const auto sigma = random_sigma(5, GapSpec{}, 300);
  const auto y = apply(sigma, rq);
  for (std::uint64_t n = 1; n <= 300; ++n) CHECK(y.at(n) == rq.at(sigma.value(n)));
  CHECK(y.defined_to() == sigma.valid_to());
}

TEST_CASE("generic subsequence lands selected blocks in A") {
  const NatSet A = NatSet::powers_of(2);
  const auto w = build_witness(builtin("density-zero"));
  BuildParams bp;
  bp.value_horizon = std::uint64_t{1} << 40;
  const auto sigma = generic_subsequence(A, w, BlockSelector::all(), bp);
  const auto audit = audit_generic(sigma, A, w, BlockSelector::all());
  CHECK(audit.ok());
  for (std::uint64_t n = 1; n <= 40 && n <= sigma.valid_to(); ++n) {
    if (w.block_of(n).value_or(0) >= 1) CHECK(A.member(sigma.value(n)) == Tri::True);
  }
  const NatSet pre = preimage(sigma, A, sigma.valid_to());
  for (std::uint64_t k = 1; k <= audit.blocks_checked; ++k)
    for (std::uint64_t i = *w.iota(k); i < *w.iota(k + 1); ++i) CHECK(pre.member(i) == Tri::True);
  const auto sel = BlockSelector::every_kth(2);
  const auto s2 = generic_subsequence(NatSet::progression(3, 3), w, sel);
  CHECK(audit_generic(s2, NatSet::progression(3, 3), w, sel).ok());
  CHECK_THROWS_AS(generic_subsequence(NatSet::finite({1, 2}), w, BlockSelector::all()), Error);
}

TEST_CASE("generic permutation lands selected blocks in A") {
  const auto w = build_witness(builtin("density-zero"));
  const NatSet A = NatSet::progression(3, 3);
  const auto pi = generic_permutation(A, w, BlockSelector::all());
  CHECK(audit_generic(pi, A, w, BlockSelector::all()).ok());
  CHECK(pi.audit_bijective(pi.support_end()));
  const auto unit = build_witness(builtin("fin"));
  const auto sw = generic_permutation(NatSet::progression(2, 2), unit, BlockSelector::index_set(NatSet::progression(1, 2)));
  CHECK(sw.rule == PermRule::SwapOddEven);
}

TEST_CASE("cluster-adding maps certify a new cluster point") {
  const auto p = small_params();
  const auto z = builtin("density-zero");
  const auto pw = sequence_from_name("char:powers2");
  BuildParams bp;
  bp.value_horizon = std::uint64_t{1} << 40;
  const auto r = cluster_adding_sigma(pw, pt(1), z, *z.witness(), p, bp);
  CHECK(r.audit.passed);
  CHECK(r.audit.min_best_density() >= Rational(1, 4));
  const auto pre = preimage(r.map, NatSet::powers_of(2), r.map.valid_to());
  CHECK(pre.count_up_to(r.map.valid_to()) > 0);
  const auto rp = cluster_adding_pi(pw, pt(1), z, *z.witness(), p, bp);
  CHECK(rp.audit.passed);
  CHECK(rp.audit.bijective);
  CHECK_THROWS_AS(cluster_adding_sigma(sequence_from_name("char:evens"), pt(1, 2), z, *z.witness(), p), Error);
}

TEST_CASE("cluster-preserving maps keep the cluster set") {
  const auto p = small_params();
  const auto z = builtin("density-zero");
  const auto ev = sequence_from_name("char:evens");
  const auto s = cluster_preserving_sigma(ev, z, *z.witness(), {}, p);
  CHECK(s.audit.passed);
  CHECK(s.audit.gamma_audited == s.audit.gamma_x);
  CHECK(s.audit.tail_inside);
  const auto pi = cluster_preserving_pi(ev, z, *z.witness(), {}, p);
  CHECK(pi.audit.passed);
  CHECK(pi.audit.bijective);
  try {
    cluster_preserving_sigma(sequence_from_name("char:powers2"), z, *z.witness(), {}, p);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::HypothesisFailed);
  }
}

TEST_CASE("greedy limit witness extraction") {
  const auto p = small_params();
  const auto rd = *builtin("density-zero").lscsm();
  const auto ev = sequence_from_name("char:evens");
  const auto r = limit_witness_extraction(ev, SubsequenceMap::identity(), pt(1), Rational(1, 4), rd, p);
  CHECK(r.valid);
  CHECK(r.all_within);
  CHECK(r.increasing);
  CHECK(r.u_recomputed >= Rational(1, 4));
  std::uint64_t prev_max = 0;
  for (const auto& b : r.blocks) {
    CHECK(rd.phi_finite(b.members) == b.phi);
    CHECK(b.phi >= Rational(1, 4));
    CHECK(b.members.front() > prev_max);
    prev_max = b.members.back();
    for (auto m : b.members) CHECK(m % 2 == 0);
  }
  try {
    limit_witness_extraction(ev, SubsequenceMap::identity(), pt(1), Rational(3, 4), rd, p);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MassUnavailable);
  }
}

TEST_CASE("sparse bijectivity audit agrees with a dense scan") {
  Rng rng(77);
  int bad = 0;
  for (int trial = 0; trial < 500; ++trial) {
    PermutationMap p;
    const std::uint64_t m = rng.range(0, 12);
    for (std::uint64_t i = 0; i < m; ++i) p.head.push_back(rng.range(1, 20));
    const std::uint64_t f = rng.range(0, 6);
    for (std::uint64_t i = 0; i < f; ++i) p.far[rng.range(1, 20)] = rng.range(1, 20);
    const std::uint64_t upto = std::max<std::uint64_t>(p.support_end(), 20);
    std::vector<std::uint8_t> hit(upto + 1, 0);
    bool dense = true;
    for (std::uint64_t n = 1; n <= upto && dense; ++n) {
      const auto v = p.value(n);
      dense = v >= 1 && v <= upto && !hit[v];
      if (dense) hit[v] = 1;
    }
    bad += !dense;
    CHECK(p.audit_bijective(upto) == dense);
  }
  CHECK(bad > 100);
}
