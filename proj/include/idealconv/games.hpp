#pragma once

// Finite-extension games on Sigma and Pi: an adversary extends the prefix at
// random, the strategy answers with an escape segment whose hit set near l
// carries phi-mass above q.

#include "idealconv/cluster.hpp"
#include "idealconv/ideal.hpp"
#include "idealconv/lscsm.hpp"
#include "idealconv/sequence.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace idealconv {

enum class GameKind { Sigma, Pi };
enum class Verdict { Win, Loss, Undetermined };
std::string to_string(GameKind k);
std::string to_string(Verdict v);

struct GameTarget {
  Point ell;
  Rational q{1, 4};
  RadiusSchedule schedule = RadiusSchedule::dyadic(10);
};

struct Move {
  std::uint64_t round = 0;
  std::string player;  // adversary | strategy
  std::uint64_t k = 0;  // radius index (strategy moves)
  std::uint64_t n1 = 0;
  std::uint64_t n2 = 0;
  std::uint64_t first_value = 0;
  std::uint64_t last_value = 0;
  std::optional<Rational> phi_lower;  // certified lower bound on phi([n1, n2])
  nlohmann::json to_json() const;
};

struct GameState {
  GameKind kind = GameKind::Sigma;
  std::vector<std::uint64_t> prefix;  // sigma(1..n0) or pi(1..n0)
  std::uint64_t round = 0;
  std::vector<Move> transcript;

  bool valid_prefix() const;  // strictly increasing (Sigma) or injective (Pi)
};

struct AdversaryLaw {
  std::uint64_t seed = 7;
  double length_p = 0.25;  // move length ~ geometric(length_p)
  double gap_p = 0.5;      // Sigma value gaps ~ geometric(gap_p)
  std::uint64_t window = 8;  // Pi: shuffled windows of the smallest unused integers
};

// Appends the minimal escape segment [n0 + 1, n2] drawn increasingly from the
// fresh members of {n : x_n in B(l, eps_k)} up to `horizon`. Throws
// SupplyExhausted when the supply runs out.
Move escape_extension(GameState& state, const SequenceSpec& x, const Point& ell, const Frac& eps_k, std::uint64_t k,
                      const Rational& q, const Lscsm& phi, std::uint64_t horizon);
Move escape_extension_pi(GameState& state, const SequenceSpec& x, const Point& ell, const Frac& eps_k, std::uint64_t k,
                         const Rational& q, const Lscsm& phi, std::uint64_t horizon);

// 1, 1, 2, 1, 2, 3, ...
std::uint64_t k_cycle(std::uint64_t move_index);

struct GameResult {
  Verdict verdict = Verdict::Undetermined;
  std::string reason;
  GameState state;
  std::uint64_t max_k = 0;
  std::uint64_t prefix_hash = 0;
  nlohmann::json to_json() const;
};

GameResult run_game(const SequenceSpec& x, const IdealHandle& I, const GameTarget& target, const AdversaryLaw& adv,
                    std::uint64_t rounds, std::uint64_t horizon, GameKind kind = GameKind::Sigma);

// Re-checks every strategy certificate of a finished game.
bool replay_audit(const SequenceSpec& x, const IdealHandle& I, const GameTarget& target, const GameState& state);

}  // namespace idealconv
