#pragma once

// Ideals on N: Exh(phi) for a normalized lscsm, plus Fin x Fin via its row rule.

#include "idealconv/lscsm.hpp"
#include "idealconv/natset.hpp"
#include "idealconv/witness.hpp"

#include <optional>
#include <string>
#include <vector>

namespace idealconv {

enum class Membership { In, NotIn, Undecided };
std::string to_string(Membership m);

struct NormEstimate {
  std::optional<Rational> exact;
  // Relative tail mass phi(s ∩ (t, N]) / phi((t, N]) at the largest cut.
  double numeric = 0.0;
  std::vector<std::uint64_t> cuts;
  std::vector<double> tail_phi;  // phi(s ∩ (t_i, N]), non-increasing in i
  std::vector<double> relative;  // tail_phi[i] / phi((t_i, N])
  std::uint64_t tail_hits = 0;   // |s ∩ (N/2, N]|
};

std::vector<std::uint64_t> default_cuts(std::uint64_t N);

// ||s||_phi when it follows from the structure of s; nullopt otherwise.
std::optional<Rational> exact_norm(const Lscsm& m, const NatSet& s);

NormEstimate norm_estimate(const Lscsm& m, const NatSet& s, std::uint64_t N,
                           std::vector<std::uint64_t> cuts = {});

struct MembershipParams {
  std::uint64_t horizon = std::uint64_t{1} << 20;
  Rational theta{1, 100};
  std::vector<std::uint64_t> cuts;  // empty: N/2, 3N/4, 7N/8
  std::uint64_t hit_min = 16;
};

struct MembershipResult {
  Membership verdict = Membership::Undecided;
  std::string path;  // exact | structural | numeric | row-rule | none
  std::optional<Rational> exact;
  std::optional<NormEstimate> estimate;
};

enum class SpecialRule { None, FinTimesFin };

class IdealHandle {
 public:
  IdealHandle(std::string name, std::optional<Lscsm> lscsm, SpecialRule rule, std::optional<WitnessIntervals> witness);

  const std::string& name() const { return name_; }
  const std::optional<Lscsm>& lscsm() const { return lscsm_; }
  SpecialRule special_rule() const { return rule_; }
  const std::optional<WitnessIntervals>& witness() const { return witness_; }
  bool analytic_p() const { return lscsm_.has_value(); }

  MembershipResult decide(const NatSet& s, const MembershipParams& p = {}) const;
  IdealHandle with_witness(WitnessIntervals w) const;

 private:
  std::string name_;
  std::optional<Lscsm> lscsm_;
  SpecialRule rule_ = SpecialRule::None;
  std::optional<WitnessIntervals> witness_;
};

MembershipResult decide_membership(const IdealHandle& I, const NatSet& s, const MembershipParams& p = {});

// fin, density-zero (alias Z), summable, gdi, fin-x-fin.
IdealHandle builtin(const std::string& name);
// gdi from {"block_ends":[...], "weights":["1","1/2",...]}.
IdealHandle builtin_gdi(const nlohmann::json& spec);
std::vector<std::string> builtin_names();

// Fin x Fin row rule; Undecided outside the supported fragment.
Membership fin_x_fin_rule(const NatSet& s);

}  // namespace idealconv
