#include "idealconv/cli.hpp"

#include "idealconv/builders.hpp"
#include "idealconv/error.hpp"
#include "idealconv/games.hpp"
#include "idealconv/json_io.hpp"
#include "idealconv/meagerness.hpp"
#include "idealconv/rng.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace idealconv {

namespace {

using nlohmann::json;

constexpr const char* kHeuristicBanner =
    "HEURISTIC: frequencies over pseudo-random maps. Baire category is not a measure; these numbers do not "
    "estimate meagerness or comeagerness.";

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int exit_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnknownIdeal:
    case ErrorCode::NotRepresentable:
    case ErrorCode::NotAnalyticP: return kExitUsage;
    case ErrorCode::HypothesisFailed:
    case ErrorCode::NotALimitPoint: return kExitHypothesis;
    default: return kExitAudit;
  }
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  f << text;
}

struct Output {
  json primary;
  std::string csv;
  int code = kExitOk;
};

void emit(const RunConfig& cfg, const Output& o, std::ostream& out) {
  if (cfg.out.empty()) {
    out << dump_canonical(o.primary);
    return;
  }
  write_file(cfg.out + ".json", dump_canonical(o.primary));
  if (!o.csv.empty()) write_file(cfg.out + ".csv", o.csv);
  write_file(cfg.out + ".meta.json",
             dump_canonical(json{{"command", cfg.command}, {"created_utc", utc_timestamp()}, {"exit_code", o.code}}));
}

std::string prefixed_csv(const std::string& label, const std::string& csv, bool header) {
  std::istringstream is(csv);
  std::string line, out;
  bool first = true;
  while (std::getline(is, line)) {
    if (first) {
      first = false;
      if (header) out += "report," + line + "\n";
      continue;
    }
    out += label + "," + line + "\n";
  }
  return out;
}

bool subset_of(const std::vector<Point>& a, const std::vector<Point>& b) {
  for (const auto& p : a)
    if (std::find(b.begin(), b.end(), p) == b.end()) return false;
  return true;
}

// ---------------------------------------------------------------- commands

Output cmd_analyze(const RunConfig& cfg) {
  const SequenceSpec x = sequence_from_name(cfg.sequence);
  const IdealHandle I = builtin(cfg.ideal);
  const AnalysisParams p = cfg.analysis();
  const std::string mode = cfg.mode.empty() ? "all" : cfg.mode;
  Output o;
  o.primary = {{"config", cfg.to_json()}, {"analysis", p.to_json()}};
  double primary_undecided = 0.0;
  bool header = true;
  std::optional<ClusterReport> L, G, Lam;
  std::vector<ClusterReport> lambdas;
  if (mode == "all" || mode == "limit") {
    L = limit_points_estimate(x, p);
    o.primary["limit_points"] = L->to_json();
    o.csv += prefixed_csv("limit_points", L->to_csv(), header);
    header = false;
    primary_undecided = L->undecided_fraction();
  }
  if (mode == "all" || mode == "gamma") {
    G = gamma_estimate(x, I, p);
    o.primary["gamma"] = G->to_json();
    o.csv += prefixed_csv("gamma", G->to_csv(), header);
    header = false;
    primary_undecided = G->undecided_fraction();
  }
  if (mode == "all" && I.analytic_p()) {
    Lam = lambda_estimate(x, I, p);
    o.primary["i_limit_points"] = Lam->to_json();
    o.csv += prefixed_csv("i_limit_points", Lam->to_csv(), header);
  }
  if (mode == "lambda" || (mode == "all" && I.analytic_p())) {
    std::vector<std::string> qs = mode == "lambda" ? std::vector<std::string>{cfg.q} : cfg.q_grid;
    json arr = json::array();
    double worst = 0.0;
    for (const auto& qs_i : qs) {
      lambdas.push_back(lambda_q_estimate(x, I, parse_rational(qs_i), p));
      arr.push_back(lambdas.back().to_json());
      o.csv += prefixed_csv("lambda:" + qs_i, lambdas.back().to_csv(), header);
      header = false;
      worst = std::max(worst, lambdas.back().undecided_fraction());
    }
    o.primary["lambda"] = arr;
    if (mode == "lambda") primary_undecided = worst;
  }
  if (mode != "all" && mode != "gamma" && mode != "lambda" && mode != "limit")
    throw Error(ErrorCode::InvalidArgument, "analyze --mode must be all, gamma, lambda or limit");
  if (L && G) {
    bool chain = subset_of(G->cluster_points(), L->cluster_points());
    const ClusterReport& upper = Lam ? *Lam : *G;
    if (Lam) chain = chain && subset_of(Lam->cluster_points(), G->cluster_points());
    for (const auto& l : lambdas) chain = chain && subset_of(l.cluster_points(), upper.cluster_points());
    o.primary["chain_holds"] = chain;
  }
  o.primary["undecided_fraction"] = std::round(primary_undecided * 1e9) / 1e9;
  if (primary_undecided > 0.5) o.code = kExitUndecided;
  return o;
}

WitnessIntervals witness_for(const RunConfig& cfg, const IdealHandle& I) {
  if (!cfg.witness_file.empty()) {
    std::ifstream f(cfg.witness_file);
    if (!f) throw Error(ErrorCode::InvalidArgument, "cannot read " + cfg.witness_file);
    json j;
    try {
      j = json::parse(f);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidArgument, std::string("malformed witness file: ") + e.what());
    }
    return witness_from_json(j.contains("witness") ? j.at("witness") : j);
  }
  return build_witness(I, parse_rational(cfg.witness_q), cfg.value_horizon);
}

Output cmd_witness_build(const RunConfig& cfg) {
  const IdealHandle I = builtin(cfg.ideal);
  const WitnessIntervals w = build_witness(I, parse_rational(cfg.q.empty() ? cfg.witness_q : cfg.q), cfg.value_horizon);
  const CertificationReport c = certify_witness(I, w, cfg.horizon);
  Output o;
  o.primary = {{"config", cfg.to_json()},
               {"witness", witness_to_json(w, cfg.horizon)},
               {"certification",
                {{"ok", c.ok},
                 {"blocks_checked", c.blocks_checked},
                 {"failing_block", c.failing_block ? json(*c.failing_block) : json(nullptr)},
                 {"min_mass", to_string(c.min_mass)}}}};
  if (!c.ok) o.code = kExitAudit;
  return o;
}

Output cmd_witness_verify(const RunConfig& cfg) {
  const IdealHandle I = builtin(cfg.ideal);
  const WitnessIntervals w = witness_for(cfg, I);
  const VerifyReport r = verify_witness(I, w, cfg.trials, cfg.horizon, cfg.seed);
  Output o;
  o.primary = {{"config", cfg.to_json()}, {"witness", witness_to_json(w, 0)}, {"report", r.to_json()}};
  if (!r.passed) o.code = kExitAudit;
  return o;
}

Output cmd_preserve(const RunConfig& cfg, bool pi) {
  const SequenceSpec x = sequence_from_name(cfg.sequence);
  const IdealHandle I = builtin(cfg.ideal);
  const AnalysisParams p = cfg.analysis();
  const WitnessIntervals w = witness_for(cfg, I);
  BuildParams bp;
  bp.value_horizon = cfg.value_horizon;
  const std::string mode = cfg.mode.empty() ? "preserve" : cfg.mode;
  Output o;
  o.primary = {{"config", cfg.to_json()}, {"witness", witness_to_json(w, 0)}};
  PreserveAudit audit;
  if (mode == "preserve") {
    if (pi) {
      auto r = cluster_preserving_pi(x, I, w, {}, p, bp);
      o.primary["map"] = r.map.to_json();
      audit = r.audit;
    } else {
      auto r = cluster_preserving_sigma(x, I, w, {}, p, bp);
      o.primary["map"] = r.map.to_json();
      audit = r.audit;
    }
  } else if (mode == "add") {
    if (cfg.ell.empty()) throw Error(ErrorCode::InvalidArgument, "preserve --mode add needs --ell");
    const Point ell = cfg.ell_point(x.dim());
    if (pi) {
      auto r = cluster_adding_pi(x, ell, I, w, p, bp);
      o.primary["map"] = r.map.to_json();
      audit = r.audit;
    } else {
      auto r = cluster_adding_sigma(x, ell, I, w, p, bp);
      o.primary["map"] = r.map.to_json();
      audit = r.audit;
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "preserve --mode must be add or preserve");
  }
  o.primary["audit"] = audit.to_json();
  o.primary["audit_result"] = audit.passed ? "PASS" : "FAIL";
  if (!audit.passed) o.code = kExitAudit;
  return o;
}

Output cmd_game(const RunConfig& cfg) {
  const SequenceSpec x = sequence_from_name(cfg.sequence);
  const IdealHandle I = builtin(cfg.ideal);
  if (cfg.ell.empty()) throw Error(ErrorCode::InvalidArgument, "game run needs --ell");
  GameTarget t;
  t.ell = cfg.ell_point(x.dim());
  t.q = parse_rational(cfg.q);
  t.schedule = cfg.analysis().schedule;
  AdversaryLaw adv;
  adv.seed = cfg.seed;
  const GameKind kind = cfg.kind == "pi" ? GameKind::Pi : GameKind::Sigma;
  if (cfg.kind != "pi" && cfg.kind != "sigma") throw Error(ErrorCode::InvalidArgument, "--kind must be sigma or pi");
  const GameResult r = run_game(x, I, t, adv, cfg.rounds, cfg.horizon, kind);
  Output o;
  o.primary = {{"config", cfg.to_json()},
               {"disclaimer", "Finitely many won games do not prove comeagerness."},
               {"transcript", r.to_json()}};
  return o;
}

Output cmd_sample(const RunConfig& cfg) {
  const SequenceSpec x = sequence_from_name(cfg.sequence);
  const IdealHandle I = builtin(cfg.ideal);
  const AnalysisParams p = cfg.analysis();
  const auto cands = candidate_points(x, p);
  const auto gx = gamma_estimate(x, I, p, cands).cluster_points();
  std::uint64_t preserved = 0, undecided = 0;
  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    const std::uint64_t s = Rng::split(cfg.seed, t);
    const SequenceSpec y = cfg.kind == "pi" ? apply(random_pi(s, 16, cfg.horizon), x)
                                            : apply(random_sigma(s, GapSpec{}, cfg.horizon), x);
    AnalysisParams py = p;
    py.horizon = std::min(p.horizon, y.defined_to());
    const ClusterReport g = gamma_estimate(y, I, py, cands);
    if (g.undecided_fraction() > 0) ++undecided;
    else if (g.cluster_points() == gx) ++preserved;
  }
  Output o;
  o.primary = {{"banner", kHeuristicBanner},
               {"config", cfg.to_json()},
               {"trials", cfg.trials},
               {"preserved", preserved},
               {"undecided", undecided},
               {"frequency", cfg.trials ? std::round(1e9 * static_cast<double>(preserved) / static_cast<double>(cfg.trials)) / 1e9 : 0.0}};
  o.csv = std::string("# ") + kHeuristicBanner + "\ntrials,preserved,undecided\n" + std::to_string(cfg.trials) + "," +
          std::to_string(preserved) + "," + std::to_string(undecided) + "\n";
  return o;
}

Output cmd_ideals_list(const RunConfig& cfg) {
  json arr = json::array();
  for (const auto& n : builtin_names()) {
    const IdealHandle I = builtin(n);
    arr.push_back({{"name", n},
                   {"analytic_p", I.analytic_p()},
                   {"lscsm", I.lscsm() ? json(I.lscsm()->describe()) : json(nullptr)},
                   {"rule", I.special_rule() == SpecialRule::FinTimesFin ? "fin-x-fin rows" : "exhaustive"}});
  }
  Output o;
  o.primary = {{"config", cfg.to_json()}, {"ideals", arr}};
  return o;
}

// ---------------------------------------------------------------- options

struct Binding {
  std::string flag;
  std::function<void(RunConfig&, const RunConfig&)> copy;
};

std::vector<Binding> bind_options(CLI::App* app, RunConfig& f, std::string& radii, std::string& q_grid,
                                  std::string& ell, std::string& config) {
  std::vector<Binding> b;
  auto add = [&](const std::string& name, auto& field, const std::string& help, auto copy) {
    app->add_option(name, field, help);
    b.push_back({name, copy});
  };
  app->add_option("--config", config, "JSON config file; flags override its values");
  add("--ideal", f.ideal, "ideal name", [](RunConfig& c, const RunConfig& s) { c.ideal = s.ideal; });
  add("--seq", f.sequence, "sequence name", [](RunConfig& c, const RunConfig& s) { c.sequence = s.sequence; });
  add("--mode", f.mode, "command mode", [](RunConfig& c, const RunConfig& s) { c.mode = s.mode; });
  add("--horizon", f.horizon, "horizon", [](RunConfig& c, const RunConfig& s) { c.horizon = s.horizon; });
  add("--K", f.K, "number of dyadic radii", [](RunConfig& c, const RunConfig& s) { c.K = s.K; });
  add("--radii", radii, "comma-separated radii", [](RunConfig& c, const RunConfig& s) { c.radii = s.radii; });
  add("--pitch", f.pitch, "grid pitch", [](RunConfig& c, const RunConfig& s) { c.pitch = s.pitch; });
  add("--q-grid", q_grid, "comma-separated q values", [](RunConfig& c, const RunConfig& s) { c.q_grid = s.q_grid; });
  add("--q", f.q, "mass threshold q", [](RunConfig& c, const RunConfig& s) { c.q = s.q; });
  add("--theta", f.theta, "numeric membership threshold", [](RunConfig& c, const RunConfig& s) { c.theta = s.theta; });
  add("--hit-min", f.hit_min, "minimum tail hits", [](RunConfig& c, const RunConfig& s) { c.hit_min = s.hit_min; });
  add("--cell-level", f.cell_level, "add a half-open grid cell level",
      [](RunConfig& c, const RunConfig& s) { c.cell_level = s.cell_level; });
  add("--ell", ell, "point, comma-separated coordinates", [](RunConfig& c, const RunConfig& s) { c.ell = s.ell; });
  add("--seed", f.seed, "seed", [](RunConfig& c, const RunConfig& s) { c.seed = s.seed; });
  add("--rounds", f.rounds, "game rounds", [](RunConfig& c, const RunConfig& s) { c.rounds = s.rounds; });
  add("--trials", f.trials, "sample count", [](RunConfig& c, const RunConfig& s) { c.trials = s.trials; });
  add("--kind", f.kind, "sigma or pi", [](RunConfig& c, const RunConfig& s) { c.kind = s.kind; });
  add("--witness-q", f.witness_q, "witness parameter", [](RunConfig& c, const RunConfig& s) { c.witness_q = s.witness_q; });
  add("--witness", f.witness_file, "witness JSON file",
      [](RunConfig& c, const RunConfig& s) { c.witness_file = s.witness_file; });
  add("--value-horizon", f.value_horizon, "largest value used by builders",
      [](RunConfig& c, const RunConfig& s) { c.value_horizon = s.value_horizon; });
  add("--out", f.out, "output base path", [](RunConfig& c, const RunConfig& s) { c.out = s.out; });
  return b;
}

}  // namespace

// ---------------------------------------------------------------- RunConfig

AnalysisParams RunConfig::analysis() const {
  AnalysisParams p;
  p.horizon = horizon;
  if (!radii.empty()) {
    p.schedule.eps.clear();
    for (const auto& r : radii) p.schedule.eps.push_back(parse_frac(r));
  } else {
    p.schedule = RadiusSchedule::dyadic(K);
  }
  p.pitch = parse_frac(pitch);
  p.cell_level = cell_level;
  p.hit_min = hit_min;
  p.theta = parse_rational(theta);
  p.q_grid.clear();
  for (const auto& q_i : q_grid) p.q_grid.push_back(parse_rational(q_i));
  p.validate();
  return p;
}

Point RunConfig::ell_point(std::size_t dim) const {
  Point pt;
  for (const auto& c : ell) pt.push_back(parse_frac(c));
  if (pt.size() != dim) throw Error(ErrorCode::InvalidArgument, "--ell has " + std::to_string(pt.size()) +
                                                                    " coordinates, the sequence lives in dimension " +
                                                                    std::to_string(dim));
  return pt;
}

void RunConfig::validate() const {
  if (horizon < 2) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 2");
  if (K < 1 && radii.empty()) throw Error(ErrorCode::InvalidArgument, "K must be >= 1");
  if (value_horizon < 1) throw Error(ErrorCode::InvalidArgument, "value horizon must be positive");
  if (parse_rational(q) <= 0) throw Error(ErrorCode::InvalidArgument, "q must be positive");
  analysis();
}

json RunConfig::to_json() const {
  return {{"command", command}, {"ideal", ideal},     {"sequence", sequence},       {"mode", mode},
          {"horizon", horizon}, {"radii", radii},     {"K", K},                     {"pitch", pitch},
          {"q_grid", q_grid},   {"q", q},             {"theta", theta},             {"hit_min", hit_min},
          {"cell_level", cell_level}, {"ell", ell},   {"seed", seed},               {"rounds", rounds},
          {"trials", trials},   {"kind", kind},       {"witness_q", witness_q},     {"witness_file", witness_file},
          {"value_horizon", value_horizon},           {"out", out}};
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("command", c.command);
    get("ideal", c.ideal);
    get("sequence", c.sequence);
    get("mode", c.mode);
    get("horizon", c.horizon);
    get("radii", c.radii);
    get("K", c.K);
    get("pitch", c.pitch);
    get("q_grid", c.q_grid);
    get("q", c.q);
    get("theta", c.theta);
    get("hit_min", c.hit_min);
    get("cell_level", c.cell_level);
    get("ell", c.ell);
    get("seed", c.seed);
    get("rounds", c.rounds);
    get("trials", c.trials);
    get("kind", c.kind);
    get("witness_q", c.witness_q);
    get("witness_file", c.witness_file);
    get("value_horizon", c.value_horizon);
    get("out", c.out);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed config: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------- entry

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ideal convergence, cluster points and generic subsequences", "idealconv"};
  app.require_subcommand(1);
  struct Leaf {
    std::string name;
    CLI::App* app;
    RunConfig flags;
    std::string radii, q_grid, ell, config;
    std::vector<Binding> bindings;
  };
  std::vector<std::unique_ptr<Leaf>> leaves;
  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& full, const std::string& help) {
    auto l = std::make_unique<Leaf>();
    l->name = full;
    l->app = parent->add_subcommand(name, help);
    l->bindings = bind_options(l->app, l->flags, l->radii, l->q_grid, l->ell, l->config);
    leaves.push_back(std::move(l));
  };
  leaf(&app, "analyze", "analyze", "limit points, I-cluster points and q-mass limit points");
  auto* witness = app.add_subcommand("witness", "witness intervals")->require_subcommand(1);
  leaf(witness, "build", "witness build", "build witness intervals");
  leaf(witness, "verify", "witness verify", "verify witness intervals on sampled sets");
  auto* preserve = app.add_subcommand("preserve", "cluster-adding and cluster-preserving maps")->require_subcommand(1);
  leaf(preserve, "sigma", "preserve sigma", "subsequence builder");
  leaf(preserve, "pi", "preserve pi", "permutation builder");
  auto* game = app.add_subcommand("game", "finite-extension games")->require_subcommand(1);
  leaf(game, "run", "game run", "play one game");
  leaf(&app, "sample", "sample", "heuristic preservation frequency over random maps");
  auto* ideals = app.add_subcommand("ideals", "built-in ideals")->require_subcommand(1);
  leaf(ideals, "list", "ideals list", "list built-in ideals");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Leaf* chosen = nullptr;
  for (auto& l : leaves)
    if (l->app->parsed()) chosen = l.get();
  if (!chosen) {
    err << dump_canonical(json{{"error", "InvalidArgument"}, {"message", "no command given"}});
    return kExitUsage;
  }
  RunConfig cfg;
  try {
    if (!chosen->config.empty()) {
      std::ifstream f(chosen->config);
      if (!f) throw Error(ErrorCode::InvalidArgument, "cannot read config " + chosen->config);
      json j;
      try {
        j = json::parse(f);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("config is not JSON: ") + e.what());
      }
      cfg = RunConfig::from_json(j);
    } else if (chosen->name == "witness build") {
      cfg.q = "";
    }
    chosen->flags.radii = split_csv(chosen->radii);
    chosen->flags.q_grid = split_csv(chosen->q_grid);
    chosen->flags.ell = split_csv(chosen->ell);
    for (const auto& b : chosen->bindings)
      if (chosen->app->count(b.flag) > 0) b.copy(cfg, chosen->flags);
    cfg.command = chosen->name;
    if (cfg.command != "witness build") cfg.validate();

    Output o;
    if (cfg.command == "analyze") o = cmd_analyze(cfg);
    else if (cfg.command == "witness build") o = cmd_witness_build(cfg);
    else if (cfg.command == "witness verify") o = cmd_witness_verify(cfg);
    else if (cfg.command == "preserve sigma") o = cmd_preserve(cfg, false);
    else if (cfg.command == "preserve pi") o = cmd_preserve(cfg, true);
    else if (cfg.command == "game run") o = cmd_game(cfg);
    else if (cfg.command == "sample") o = cmd_sample(cfg);
    else o = cmd_ideals_list(cfg);
    emit(cfg, o, out);
    return o.code;
  } catch (const Error& e) {
    err << dump_canonical(json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}});
    return exit_for(e.code());
  } catch (const std::exception& e) {
    err << dump_canonical(json{{"error", "Internal"}, {"message", e.what()}});
    return kExitAudit;
  }
}

}  // namespace idealconv
