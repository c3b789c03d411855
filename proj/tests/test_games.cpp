#include "doctest.h"

#include "idealconv/error.hpp"
#include "idealconv/games.hpp"

using namespace idealconv;

namespace {

Point pt(std::int64_t n, std::int64_t d = 1) { return Point{Frac(n, d)}; }

GameTarget target(Point ell, Rational q = Rational(1, 4)) {
  GameTarget t;
  t.ell = std::move(ell);
  t.q = q;
  t.schedule = RadiusSchedule::dyadic(6);
  return t;
}

}  // namespace

TEST_CASE("k cycle") {
  const std::vector<std::uint64_t> expect{1, 1, 2, 1, 2, 3, 1, 2, 3, 4, 1};
  for (std::size_t i = 0; i < expect.size(); ++i) CHECK(k_cycle(i) == expect[i]);
}

TEST_CASE("escape extension is minimal and certified") {
  const auto rd = *builtin("density-zero").lscsm();
  const auto ev = sequence_from_name("char:evens");
  GameState s;
  const auto m = escape_extension(s, ev, pt(1), Frac(1, 2), 1, Rational(1, 4), rd, 100000);
  CHECK(m.n1 == 1);
  CHECK(s.prefix.size() == m.n2);
  CHECK(*m.phi_lower == rd.phi_interval(m.n1, m.n2));
  CHECK(*m.phi_lower > Rational(1, 4));
  if (m.n2 > m.n1) CHECK(rd.phi_interval(m.n1, m.n2 - 1) <= Rational(1, 4));
  for (auto v : s.prefix) CHECK(v % 2 == 0);
  CHECK(s.valid_prefix());
  s.prefix.resize(40);
  for (std::size_t i = 0; i < 40; ++i) s.prefix[i] = 3 * (i + 1);
  const auto m2 = escape_extension(s, ev, pt(1), Frac(1, 4), 2, Rational(1, 4), rd, 100000);
  CHECK(m2.n1 == 41);
  CHECK(m2.first_value > 120);
  CHECK(s.valid_prefix());
}

TEST_CASE("escape extension on a convergent sequence") {
  const auto rd = *builtin("density-zero").lscsm();
  GameState s;
  const auto m = escape_extension(s, sequence_from_name("harmonic"), pt(0), Frac(1, 8), 1, Rational(1, 2), rd, 100000);
  CHECK(*m.phi_lower > Rational(1, 2));
  CHECK(rd.phi_interval(m.n1, m.n2 - 1) <= Rational(1, 2));
  for (auto v : s.prefix) CHECK(v > 8);
}

TEST_CASE("escape extension runs out on a sparse supply") {
  const auto rd = *builtin("density-zero").lscsm();
  GameState s;
  for (std::uint64_t v = 1; v <= 100; ++v) s.prefix.push_back(v);
  try {
    escape_extension(s, sequence_from_name("char:powers2"), pt(1), Frac(1, 2), 1, Rational(1, 2), rd, 100000);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SupplyExhausted);
  }
}

TEST_CASE("permutation escape skips values the adversary used") {
  const auto rd = *builtin("density-zero").lscsm();
  GameState s;
  s.kind = GameKind::Pi;
  for (std::uint64_t v = 2; v <= 40; v += 2) s.prefix.push_back(v);
  const auto m = escape_extension_pi(s, sequence_from_name("char:evens"), pt(1), Frac(1, 2), 1, Rational(1, 4), rd, 100000);
  CHECK(m.first_value == 42);
  CHECK(s.valid_prefix());
  CHECK(*m.phi_lower > Rational(1, 4));
  GameState bad;
  CHECK_THROWS_AS(escape_extension_pi(bad, sequence_from_name("char:evens"), pt(1), Frac(1, 2), 1, Rational(1, 4), rd, 100000), Error);
}

TEST_CASE("games are won on supported targets and replay") {
  const auto z = builtin("density-zero");
  const auto ev = sequence_from_name("char:evens");
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (auto kind : {GameKind::Sigma, GameKind::Pi}) {
      AdversaryLaw adv;
      adv.seed = seed;
      const auto r = run_game(ev, z, target(pt(1)), adv, 20, 100000, kind);
      CHECK(r.verdict == Verdict::Win);
      CHECK(r.state.valid_prefix());
      CHECK(replay_audit(ev, z, target(pt(1)), r.state));
      const auto again = run_game(ev, z, target(pt(1)), adv, 20, 100000, kind);
      CHECK(again.prefix_hash == r.prefix_hash);
      CHECK(again.to_json() == r.to_json());
    }
  }
}

TEST_CASE("tampered transcripts fail the replay audit") {
  const auto z = builtin("density-zero");
  const auto ev = sequence_from_name("char:evens");
  auto r = run_game(ev, z, target(pt(0)), AdversaryLaw{}, 10, 100000);
  REQUIRE(r.verdict == Verdict::Win);
  GameState s = r.state;
  for (auto& m : s.transcript)
    if (m.player == "strategy") m.n2 = m.n1;  // a single hit at n1 > 4 has mass below 1/4
  bool any_late = false;
  for (const auto& m : s.transcript) any_late = any_late || (m.player == "strategy" && m.n1 > 4);
  if (any_late) CHECK_FALSE(replay_audit(ev, z, target(pt(0)), s));
  auto w = run_game(ev, z, target(pt(1)), AdversaryLaw{}, 10, 100000);
  REQUIRE(w.verdict == Verdict::Win);
  for (const auto& m : w.state.transcript) {
    if (m.player != "strategy") continue;
    w.state.prefix[m.n1 - 1] += 1;  // an odd index, where x = 0
    break;
  }
  CHECK_FALSE(replay_audit(ev, z, target(pt(1)), w.state));
}

TEST_CASE("losses and edge cases") {
  const auto z = builtin("density-zero");
  const auto pw = sequence_from_name("char:powers2");
  const auto r = run_game(pw, z, target(pt(1)), AdversaryLaw{}, 20, 100000);
  CHECK(r.verdict == Verdict::Loss);
  CHECK(r.reason == "SupplyExhausted");
  const auto u = run_game(pw, z, target(pt(1)), AdversaryLaw{}, 0, 100000);
  CHECK(u.verdict == Verdict::Undetermined);
  CHECK_THROWS_AS(run_game(pw, builtin("fin-x-fin"), target(pt(1)), AdversaryLaw{}, 5, 1000), Error);
}
