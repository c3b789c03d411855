#pragma once

// Command-line surface: configuration, commands and report emission.

#include "idealconv/cluster.hpp"

#include "json.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace idealconv {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitUndecided = 2, kExitHypothesis = 3, kExitAudit = 4 };

struct RunConfig {
  std::string command;     // analyze | witness build | ... (space separated)
  std::string ideal = "density-zero";
  std::string sequence = "char:evens";
  std::string mode;        // analyze: all|gamma|lambda|limit; preserve: add|preserve
  std::uint64_t horizon = std::uint64_t{1} << 16;
  std::vector<std::string> radii;  // empty: dyadic with K levels
  std::uint64_t K = 10;
  std::string pitch = "1/1024";
  std::vector<std::string> q_grid{"1/8", "1/4", "1/2"};
  std::string q = "1/4";
  std::string theta = "1/4096";
  std::uint64_t hit_min = 16;
  bool cell_level = false;
  std::vector<std::string> ell;    // point coordinates
  std::uint64_t seed = 7;
  std::uint64_t rounds = 20;
  std::uint64_t trials = 100;
  std::string kind = "sigma";      // game / sample map kind
  std::string witness_q = "1/2";
  std::string witness_file;
  std::uint64_t value_horizon = std::uint64_t{1} << 20;
  std::string out;                 // output base path; empty: stdout

  AnalysisParams analysis() const;
  Point ell_point(std::size_t dim) const;
  void validate() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

// Runs one command line (without the program name). Reports go to `out`
// (or files when --out is given); errors go to `err` as JSON.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace idealconv
