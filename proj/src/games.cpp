#include "idealconv/games.hpp"

#include "idealconv/error.hpp"
#include "idealconv/json_io.hpp"
#include "idealconv/rng.hpp"

#include <algorithm>
#include <set>

namespace idealconv {

namespace {

// Minimal n2 >= n1 with phi_lower([n1, n2]) > q.
std::pair<std::uint64_t, Rational> minimal_escape(const Lscsm& phi, std::uint64_t n1, const Rational& q,
                                                  std::uint64_t limit) {
  auto mass = [&](std::uint64_t n2) { return phi.phi_interval_lower(n1, n2); };
  std::uint64_t len = 1;
  while (mass(n1 + len - 1) <= q) {
    if (len > limit) throw Error(ErrorCode::SupplyExhausted, "no escape segment reaches mass " + to_string(q));
    len *= 2;
  }
  std::uint64_t lo = len / 2, hi = len;  // mass(lo) <= q (or lo == 0), mass(hi) > q
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (mass(n1 + mid - 1) > q) hi = mid;
    else lo = mid;
  }
  return {n1 + hi - 1, mass(n1 + hi - 1)};
}

NatSet hit_set(const SequenceSpec& x, const Point& ell, const Frac& eps, std::uint64_t horizon) {
  return indicator_set(x, Region{ell, eps, false}, std::min(horizon, x.defined_to()));
}

std::uint64_t fnv1a(const std::vector<std::uint64_t>& v) {
  std::uint64_t h = 1469598103934665603ULL;
  for (auto x : v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (x >> (8 * b)) & 0xff;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

std::vector<std::uint64_t> sorted_copy(const std::vector<std::uint64_t>& v) {
  std::vector<std::uint64_t> s = v;
  std::sort(s.begin(), s.end());
  return s;
}

// Smallest integer >= from that is not in `used` (sorted).
std::uint64_t next_unused(const std::vector<std::uint64_t>& used, std::uint64_t from) {
  auto it = std::lower_bound(used.begin(), used.end(), from);
  while (it != used.end() && *it == from) {
    ++from;
    ++it;
  }
  return from;
}

void adversary_sigma(GameState& s, Rng& rng, const AdversaryLaw& adv, std::uint64_t horizon) {
  Move m;
  m.round = s.round;
  m.player = "adversary";
  m.n1 = s.prefix.size() + 1;
  const std::uint64_t len = rng.geometric(adv.length_p);
  std::uint64_t prev = s.prefix.empty() ? 0 : s.prefix.back();
  for (std::uint64_t i = 0; i < len; ++i) {
    const std::uint64_t v = prev + rng.geometric(adv.gap_p);
    if (v > horizon) break;
    s.prefix.push_back(v);
    prev = v;
  }
  m.n2 = s.prefix.size();
  if (m.n2 >= m.n1) {
    m.first_value = s.prefix[m.n1 - 1];
    m.last_value = s.prefix.back();
  }
  s.transcript.push_back(m);
}

void adversary_pi(GameState& s, Rng& rng, const AdversaryLaw& adv) {
  Move m;
  m.round = s.round;
  m.player = "adversary";
  m.n1 = s.prefix.size() + 1;
  const auto used = sorted_copy(s.prefix);
  std::vector<std::uint64_t> seg;
  std::uint64_t c = 1;
  for (std::uint64_t i = 0; i < std::max<std::uint64_t>(1, adv.window); ++i) {
    c = next_unused(used, c);
    seg.push_back(c++);
  }
  rng.shuffle(seg);
  s.prefix.insert(s.prefix.end(), seg.begin(), seg.end());
  m.n2 = s.prefix.size();
  m.first_value = seg.front();
  m.last_value = seg.back();
  s.transcript.push_back(m);
}

}  // namespace

std::string to_string(GameKind k) { return k == GameKind::Sigma ? "sigma" : "pi"; }

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Win: return "Win";
    case Verdict::Loss: return "Loss";
    case Verdict::Undetermined: return "Undetermined";
  }
  return "?";
}

nlohmann::json Move::to_json() const {
  return {{"round", round},
          {"player", player},
          {"k", k},
          {"n1", n1},
          {"n2", n2},
          {"first_value", first_value},
          {"last_value", last_value},
          {"phi_lower", phi_lower ? nlohmann::json(to_string(*phi_lower)) : nlohmann::json(nullptr)}};
}

bool GameState::valid_prefix() const {
  if (kind == GameKind::Sigma) {
    for (std::size_t i = 0; i < prefix.size(); ++i)
      if (prefix[i] < 1 || (i > 0 && prefix[i] <= prefix[i - 1])) return false;
    return true;
  }
  const auto s = sorted_copy(prefix);
  return std::adjacent_find(s.begin(), s.end()) == s.end() && (s.empty() || s.front() >= 1);
}

std::uint64_t k_cycle(std::uint64_t move_index) {
  std::uint64_t m = 1;
  while (move_index >= m) {
    move_index -= m;
    ++m;
  }
  return move_index + 1;
}

Move escape_extension(GameState& state, const SequenceSpec& x, const Point& ell, const Frac& eps_k, std::uint64_t k,
                      const Rational& q, const Lscsm& phi, std::uint64_t horizon) {
  if (state.kind != GameKind::Sigma) throw Error(ErrorCode::InvalidArgument, "escape_extension acts on subsequence prefixes");
  const std::uint64_t n1 = state.prefix.size() + 1;
  const auto [n2, mass] = minimal_escape(phi, n1, q, horizon);
  const NatSet A = hit_set(x, ell, eps_k, horizon);
  const std::uint64_t limit = std::min(horizon, A.decidable_limit());
  std::uint64_t prev = state.prefix.empty() ? 0 : state.prefix.back();
  std::vector<std::uint64_t> seg;
  seg.reserve(n2 - n1 + 1);
  for (std::uint64_t n = n1; n <= n2; ++n) {
    const auto v = A.next_member(prev + 1, limit);
    if (!v)
      throw Error(ErrorCode::SupplyExhausted, "indicator supply near " + to_string(ell) + " ends below horizon " +
                                                  std::to_string(horizon));
    seg.push_back(*v);
    prev = *v;
  }
  state.prefix.insert(state.prefix.end(), seg.begin(), seg.end());
  Move m{state.round, "strategy", k, n1, n2, seg.front(), seg.back(), mass};
  state.transcript.push_back(m);
  return m;
}

Move escape_extension_pi(GameState& state, const SequenceSpec& x, const Point& ell, const Frac& eps_k, std::uint64_t k,
                         const Rational& q, const Lscsm& phi, std::uint64_t horizon) {
  if (state.kind != GameKind::Pi) throw Error(ErrorCode::InvalidArgument, "escape_extension_pi acts on permutation prefixes");
  const std::uint64_t n1 = state.prefix.size() + 1;
  const auto [n2, mass] = minimal_escape(phi, n1, q, horizon);
  const NatSet A = hit_set(x, ell, eps_k, horizon);
  const std::uint64_t limit = std::min(horizon, A.decidable_limit());
  const auto used = sorted_copy(state.prefix);
  std::vector<std::uint64_t> seg;
  seg.reserve(n2 - n1 + 1);
  std::uint64_t from = 1;
  for (std::uint64_t n = n1; n <= n2; ++n) {
    auto v = A.next_member(from, limit);
    while (v && std::binary_search(used.begin(), used.end(), *v)) v = A.next_member(*v + 1, limit);
    if (!v)
      throw Error(ErrorCode::SupplyExhausted, "indicator supply near " + to_string(ell) + " ends below horizon " +
                                                  std::to_string(horizon));
    seg.push_back(*v);
    from = *v + 1;
  }
  // Values above the prefix length displace integers that the close-out pairs
  // back; their count must stay within the horizon.
  std::uint64_t displaced = 0;
  const std::uint64_t len = n2;
  for (auto v : used) displaced += v > len;
  for (auto v : seg) displaced += v > len;
  if (displaced > horizon) throw Error(ErrorCode::BijectivityOverflow, "displaced integers exceed the horizon");
  state.prefix.insert(state.prefix.end(), seg.begin(), seg.end());
  Move m{state.round, "strategy", k, n1, n2, seg.front(), seg.back(), mass};
  state.transcript.push_back(m);
  return m;
}

nlohmann::json GameResult::to_json() const {
  auto moves = nlohmann::json::array();
  for (const auto& m : state.transcript) moves.push_back(m.to_json());
  return {{"kind", to_string(state.kind)},
          {"verdict", to_string(verdict)},
          {"reason", reason},
          {"rounds_played", state.round},
          {"max_k", max_k},
          {"prefix_length", state.prefix.size()},
          {"prefix_hash", prefix_hash},
          {"moves", moves}};
}

bool replay_audit(const SequenceSpec& x, const IdealHandle& I, const GameTarget& target, const GameState& state) {
  if (!I.lscsm()) return false;
  if (!state.valid_prefix()) return false;
  const Lscsm& phi = *I.lscsm();
  for (const auto& m : state.transcript) {
    if (m.player != "strategy") continue;
    if (m.k < 1 || m.k > target.schedule.eps.size() || m.n2 < m.n1 || m.n2 > state.prefix.size()) return false;
    if (!(phi.phi_interval_lower(m.n1, m.n2) > target.q)) return false;
    const Region r{target.ell, target.schedule.eps[m.k - 1], false};
    for (std::uint64_t n = m.n1; n <= m.n2; ++n)
      if (!r.contains(x.at(state.prefix[n - 1]))) return false;
  }
  return true;
}

GameResult run_game(const SequenceSpec& x, const IdealHandle& I, const GameTarget& target, const AdversaryLaw& adv,
                    std::uint64_t rounds, std::uint64_t horizon, GameKind kind) {
  if (!I.lscsm()) throw Error(ErrorCode::NotAnalyticP, I.name() + " has no lscsm representation");
  target.schedule.validate();
  GameResult res;
  res.state.kind = kind;
  if (rounds == 0) {
    res.reason = "no rounds played";
    return res;
  }
  const Lscsm& phi = *I.lscsm();
  const std::uint64_t K = target.schedule.eps.size();
  Rng rng(adv.seed);
  for (std::uint64_t r = 1; r <= rounds; ++r) {
    res.state.round = r;
    if (kind == GameKind::Sigma) adversary_sigma(res.state, rng, adv, horizon);
    else adversary_pi(res.state, rng, adv);
    const std::uint64_t k = std::min(k_cycle(r - 1), K);
    try {
      if (kind == GameKind::Sigma)
        escape_extension(res.state, x, target.ell, target.schedule.eps[k - 1], k, target.q, phi, horizon);
      else
        escape_extension_pi(res.state, x, target.ell, target.schedule.eps[k - 1], k, target.q, phi, horizon);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SupplyExhausted && e.code() != ErrorCode::BijectivityOverflow) throw;
      res.verdict = Verdict::Loss;
      res.reason = std::string(to_string(e.code()));
      break;
    }
    res.max_k = std::max(res.max_k, k);
  }
  if (res.verdict != Verdict::Loss) {
    const bool ok = replay_audit(x, I, target, res.state);
    res.verdict = ok ? Verdict::Win : Verdict::Loss;
    res.reason = ok ? "all escape certificates verified" : "audit failed";
  }
  res.prefix_hash = fnv1a(res.state.prefix);
  return res;
}

}  // namespace idealconv
