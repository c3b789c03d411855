#pragma once

// Limit points, I-cluster points, q-mass limit points and I-convergence of
// bounded sequences, evaluated over a finite candidate set and radius schedule.

#include "idealconv/ideal.hpp"
#include "idealconv/sequence.hpp"
#include "idealconv/transforms.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace idealconv {

struct RadiusSchedule {
  std::vector<Frac> eps;  // strictly decreasing, positive

  // eps_k = 2^-k, k = 1..K.
  static RadiusSchedule dyadic(std::size_t K = 10);
  void validate() const;
  const Frac& smallest() const { return eps.back(); }
};

struct AnalysisParams {
  std::uint64_t horizon = std::uint64_t{1} << 16;
  RadiusSchedule schedule = RadiusSchedule::dyadic(10);
  Frac pitch{1, 1024};
  // Adds a final level: the half-open grid cell [c - pitch/2, c + pitch/2).
  bool cell_level = false;
  std::uint64_t hit_min = 16;
  Rational theta{1, 4096};
  std::vector<Rational> q_grid{Rational(1, 8), Rational(1, 4), Rational(1, 2)};

  void validate() const;
  MembershipParams membership() const;
  nlohmann::json to_json() const;
};

enum class Classification { Cluster, NotCluster, Undecided };
enum class ReportMode { Gamma, Lambda, LambdaQ, LimitPoints };
std::string to_string(Classification c);
std::string to_string(ReportMode m);

struct LevelRecord {
  Frac eps;
  bool cell = false;
  Membership verdict = Membership::Undecided;  // Gamma/LambdaQ; LimitPoints: NotIn = infinite
  std::string path;
  std::optional<Rational> exact;  // norm (or 0/1 infinitude for LimitPoints)
  double numeric = 0.0;
  std::uint64_t tail_hits = 0;
};

struct CandidateRecord {
  Point point;
  std::vector<LevelRecord> levels;
  Classification cls = Classification::Undecided;
};

struct ClusterReport {
  ReportMode mode = ReportMode::Gamma;
  std::optional<Rational> q;
  std::string sequence;
  std::string ideal;
  std::vector<CandidateRecord> candidates;

  std::vector<Point> cluster_points() const;
  double undecided_fraction() const;
  Classification classify(const Point& p) const;  // Undecided when p is not a candidate
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// Alphabet letters; otherwise the centers of the grid cells (of the given
// pitch) that hold some tail point x_n, n in (N/2, N].
std::vector<Point> candidate_points(const SequenceSpec& x, const AnalysisParams& p);

ClusterReport limit_points_estimate(const SequenceSpec& x, const AnalysisParams& p);
ClusterReport gamma_estimate(const SequenceSpec& x, const IdealHandle& I, const AnalysisParams& p);
// Throws NotAnalyticP when I has no lscsm.
ClusterReport lambda_q_estimate(const SequenceSpec& x, const IdealHandle& I, const Rational& q, const AnalysisParams& p);
// I-limit points as the union over q > 0: positive mass at the smallest
// radius (exact, or numeric mass >= theta). Throws NotAnalyticP.
ClusterReport lambda_estimate(const SequenceSpec& x, const IdealHandle& I, const AnalysisParams& p);
// Same, over a caller-fixed candidate list.
ClusterReport gamma_estimate(const SequenceSpec& x, const IdealHandle& I, const AnalysisParams& p,
                             const std::vector<Point>& candidates);
ClusterReport limit_points_estimate(const SequenceSpec& x, const AnalysisParams& p, const std::vector<Point>& candidates);

struct UFrak {
  std::optional<Rational> exact;  // at the smallest radius
  double numeric = 0.0;
  std::vector<std::optional<Rational>> exact_levels;
  std::vector<double> numeric_levels;
  bool non_increasing = true;
};

// lim_k ||{n : x_{sigma(n)} in B(l, eps_k)}||_phi, read at the smallest radius.
UFrak u_frak(const SequenceSpec& x, const SubsequenceMap& sigma, const Point& ell, const Lscsm& phi,
             const AnalysisParams& p);

enum class Convergence { Converges, Diverges, Undecided };
std::string to_string(Convergence c);

struct ConvergenceResult {
  Convergence verdict = Convergence::Undecided;
  Convergence primary = Convergence::Undecided;  // complements of neighborhoods in I
  Convergence cross = Convergence::Undecided;    // Gamma is the singleton {l}
  bool disagreement = false;
  nlohmann::json to_json() const;
};

ConvergenceResult ideal_convergence_check(const SequenceSpec& x, const IdealHandle& I, const Point& ell,
                                          const AnalysisParams& p);

}  // namespace idealconv
