#pragma once

// Constructive builders for subsequences and permutations landing in the
// generic families, with exact finite-scale audits.

#include "idealconv/cluster.hpp"
#include "idealconv/ideal.hpp"
#include "idealconv/transforms.hpp"
#include "idealconv/witness.hpp"

#include "json.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace idealconv {

// Values are drawn at most up to value_horizon; the table is cut back to the
// end of the last completely filled witness block.
struct BuildParams {
  std::uint64_t value_horizon = std::uint64_t{1} << 20;
  std::uint64_t max_table = std::uint64_t{1} << 22;
};

struct BlockAudit {
  std::uint64_t blocks_checked = 0;
  std::uint64_t failures = 0;
  std::optional<std::uint64_t> first_failure;
  std::uint64_t table_size = 0;
  bool ok() const { return failures == 0 && blocks_checked > 0; }
  nlohmann::json to_json() const;
};

SubsequenceMap generic_subsequence(const NatSet& A, const WitnessIntervals& w, const BlockSelector& sel,
                                   const BuildParams& bp = {});
PermutationMap generic_permutation(const NatSet& A, const WitnessIntervals& w, const BlockSelector& sel,
                                   const BuildParams& bp = {});

// Every selected block I_k lying inside the table satisfies I_k ⊆ t^{-1}[A].
BlockAudit audit_generic(const SubsequenceMap& sigma, const NatSet& A, const WitnessIntervals& w,
                         const BlockSelector& sel);
BlockAudit audit_generic(const PermutationMap& pi, const NatSet& A, const WitnessIntervals& w,
                         const BlockSelector& sel);

// Per (candidate, radius level): witness blocks whose image lies in the ball
// and the best running density of the preimage at such a block end.
struct LevelCertificate {
  Frac eps;
  std::uint64_t blocks_contained = 0;
  Rational best_density = 0;
  std::optional<std::uint64_t> best_block;
};

struct CandidateCertificate {
  Point point;
  std::vector<LevelCertificate> levels;
  std::uint64_t blocks_assigned = 0;
};

struct PreserveAudit {
  std::vector<CandidateCertificate> candidates;
  // Tail values of t(x) all lie within the smallest radius of a target point.
  bool tail_inside = true;
  std::uint64_t table_size = 0;
  std::uint64_t blocks_built = 0;
  bool bijective = true;
  // Target points of the construction and the points the audit certifies.
  std::vector<Point> gamma_x;
  std::vector<Point> gamma_audited;
  bool passed = false;
  Rational min_best_density() const;
  nlohmann::json to_json() const;
};

template <class Map>
struct BuildResult {
  Map map;
  PreserveAudit audit;
};

// Diagonal construction: witness block k draws from
// A_{m(k)} = {n : x_n in B(l, eps_{m(k)})}, m(k) = min(ceil(k/2), K).
// Throws NotALimitPoint when some A_m is finite at the analysis horizon.
BuildResult<SubsequenceMap> cluster_adding_sigma(const SequenceSpec& x, const Point& ell, const IdealHandle& I,
                                                 const WitnessIntervals& w, const AnalysisParams& p,
                                                 const BuildParams& bp = {});
BuildResult<PermutationMap> cluster_adding_pi(const SequenceSpec& x, const Point& ell, const IdealHandle& I,
                                              const WitnessIntervals& w, const AnalysisParams& p,
                                              const BuildParams& bp = {});

// Round-robin over the candidates: block k goes to candidate k mod |L| at
// radius index min(ceil(k/|L|), K). Throws HypothesisFailed unless the
// I-cluster points and the limit points agree at resolution. Empty
// `candidates` means the cluster points found by the analysis.
BuildResult<SubsequenceMap> cluster_preserving_sigma(const SequenceSpec& x, const IdealHandle& I,
                                                     const WitnessIntervals& w, const std::vector<Point>& candidates,
                                                     const AnalysisParams& p, const BuildParams& bp = {});
BuildResult<PermutationMap> cluster_preserving_pi(const SequenceSpec& x, const IdealHandle& I,
                                                  const WitnessIntervals& w, const std::vector<Point>& candidates,
                                                  const AnalysisParams& p, const BuildParams& bp = {});

struct ExtractionBlock {
  std::vector<std::uint64_t> members;
  Rational phi;
  Frac eps;
};

struct ExtractionResult {
  SubsequenceMap tau;  // increasing enumeration of the union of the blocks
  std::vector<ExtractionBlock> blocks;
  bool all_within = true;  // every member of block k lies within eps_k of l
  bool increasing = true;  // min F_k > max F_{k-1}
  Rational u_recomputed;   // min over levels j of max_{k >= j} phi(F_k ∩ A_j)
  bool valid = false;
  nlohmann::json to_json() const;
};

// Greedy blocks F_k ⊆ {n : x_{sigma(n)} in B(l, eps_k)} with phi(F_k) >= q.
// Throws MassUnavailable when some F_k cannot reach q below the horizon.
ExtractionResult limit_witness_extraction(const SequenceSpec& x, const SubsequenceMap& sigma, const Point& ell,
                                          const Rational& q, const Lscsm& phi, const AnalysisParams& p);

}  // namespace idealconv
