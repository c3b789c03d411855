#include "doctest.h"

#include "idealconv/cli.hpp"
#include "idealconv/error.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace idealconv;
using nlohmann::json;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
  json j() const { return json::parse(out); }
};

Run run(std::vector<std::string> args) {
  std::ostringstream o, e;
  Run r;
  r.code = run_cli(args, o, e);
  r.out = o.str();
  r.err = e.str();
  return r;
}

std::vector<std::string> small(std::vector<std::string> args) {
  for (const char* a : {"--horizon", "4096", "--K", "6", "--pitch", "1/64"}) args.emplace_back(a);
  return args;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("run config round trips") {
  RunConfig c;
  c.command = "analyze";
  c.ell = {"1/2"};
  c.radii = {"1/2", "1/8"};
  c.seed = 99;
  const RunConfig d = RunConfig::from_json(c.to_json());
  CHECK(d.to_json() == c.to_json());
  RunConfig bad;
  bad.horizon = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  RunConfig inc;
  inc.radii = {"1/8", "1/2"};
  CHECK_THROWS_AS(inc.validate(), Error);
}

TEST_CASE("ideals list") {
  const auto r = run({"ideals", "list"});
  CHECK(r.code == kExitOk);
  CHECK(r.j().at("ideals").size() == 5);
}

TEST_CASE("analyze reports") {
  const auto pw = run(small({"analyze", "--seq", "char:powers2", "--ideal", "density-zero"}));
  REQUIRE(pw.code == kExitOk);
  CHECK(pw.j().at("gamma").at("cluster_points") == json::array({json::array({"0"})}));
  CHECK(pw.j().at("limit_points").at("cluster_points") == json::array({json::array({"0"}), json::array({"1"})}));
  CHECK(pw.j().at("chain_holds") == true);
  const auto h = run(small({"analyze", "--seq", "harmonic", "--ideal", "fin"}));
  CHECK(h.j().at("gamma").at("cluster_points") == h.j().at("limit_points").at("cluster_points"));
  const auto l = run(small({"analyze", "--seq", "char:evens", "--ideal", "density-zero", "--mode", "lambda", "--q", "1/4"}));
  REQUIRE(l.code == kExitOk);
  CHECK(l.j().at("lambda").at(0).at("q") == "1/4");
  CHECK(l.j().at("lambda").at(0).at("cluster_points").size() == 2);
}

TEST_CASE("usage and domain errors map to exit codes") {
  CHECK(run({"analyze", "--bogus"}).code == kExitUsage);
  CHECK(run({}).code == kExitUsage);
  const auto u = run({"analyze", "--ideal", "nope"});
  CHECK(u.code == kExitUsage);
  CHECK(json::parse(u.err).at("error") == "UnknownIdeal");
  CHECK(run({"analyze", "--horizon", "0"}).code == kExitUsage);
  CHECK(run({"analyze", "--config", "/nonexistent.json"}).code == kExitUsage);
  const auto hyp = run(small({"preserve", "sigma", "--seq", "char:powers2", "--ideal", "Z", "--mode", "preserve"}));
  CHECK(hyp.code == kExitHypothesis);
  CHECK(json::parse(hyp.err).at("error") == "HypothesisFailed");
  const auto nl = run(small({"preserve", "sigma", "--seq", "char:evens", "--ideal", "Z", "--mode", "add", "--ell", "1/2"}));
  CHECK(nl.code == kExitHypothesis);
}

TEST_CASE("witness commands") {
  const auto b = run({"witness", "build", "--ideal", "density-zero", "--q", "1/2"});
  REQUIRE(b.code == kExitOk);
  const auto iota = b.j().at("witness").at("iota");
  CHECK(iota.at(0) == 2);
  CHECK(iota.at(1) == 4);
  CHECK(iota.at(2) == 8);
  CHECK(b.j().at("certification").at("ok") == true);
  const auto v = run({"witness", "verify", "--ideal", "density-zero", "--trials", "5"});
  CHECK(v.code == kExitOk);
  CHECK(v.j().at("report").at("passed") == true);
}

TEST_CASE("preserve commands") {
  const auto s = run(small({"preserve", "sigma", "--seq", "char:evens", "--ideal", "density-zero", "--mode", "preserve"}));
  REQUIRE(s.code == kExitOk);
  CHECK(s.j().at("audit_result") == "PASS");
  const auto p = run(small({"preserve", "pi", "--seq", "char:evens", "--ideal", "density-zero"}));
  CHECK(p.code == kExitOk);
}

TEST_CASE("game and sample outputs") {
  const auto g = run({"game", "run", "--seq", "char:evens", "--ideal", "Z", "--ell", "1", "--q", "1/4", "--rounds", "20", "--seed", "7"});
  REQUIRE(g.code == kExitOk);
  CHECK(g.j().at("transcript").at("verdict") == "Win");
  CHECK(g.j().at("config").at("seed") == 7);
  const auto s = run(small({"sample", "--seq", "char:evens", "--ideal", "Z", "--trials", "3"}));
  CHECK(s.code == kExitOk);
  CHECK(s.j().at("banner").get<std::string>().rfind("HEURISTIC", 0) == 0);
}

TEST_CASE("config files and flag overrides") {
  const auto dir = std::filesystem::temp_directory_path() / "idealconv_cli_test";
  std::filesystem::create_directories(dir);
  RunConfig c;
  c.sequence = "char:powers2";
  c.ideal = "fin";
  c.horizon = 4096;
  c.K = 6;
  c.pitch = "1/64";
  {
    std::ofstream f(dir / "cfg.json");
    f << c.to_json().dump();
  }
  const auto r = run({"analyze", "--config", (dir / "cfg.json").string(), "--ideal", "density-zero"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.j().at("config").at("ideal") == "density-zero");
  CHECK(r.j().at("config").at("sequence") == "char:powers2");
  CHECK(r.j().at("config").at("horizon") == 4096);

  const auto base = (dir / "run").string();
  const auto w = run(small({"analyze", "--seq", "char:evens", "--out", base}));
  REQUIRE(w.code == kExitOk);
  CHECK(std::filesystem::exists(base + ".json"));
  CHECK(std::filesystem::exists(base + ".csv"));
  CHECK(std::filesystem::exists(base + ".meta.json"));
  const std::string first = slurp(base + ".json");
  const std::string first_csv = slurp(base + ".csv");
  run(small({"analyze", "--seq", "char:evens", "--out", base}));
  CHECK(slurp(base + ".json") == first);
  CHECK(slurp(base + ".csv") == first_csv);
  std::filesystem::remove_all(dir);
}

TEST_CASE("reruns are byte-identical") {
  const std::vector<std::vector<std::string>> cmds{
      small({"analyze", "--seq", "rationals", "--ideal", "density-zero"}),
      {"witness", "build", "--ideal", "summable"},
      {"witness", "verify", "--ideal", "fin-x-fin", "--trials", "3", "--horizon", "100000"},
      small({"preserve", "pi", "--seq", "char:powers2", "--ideal", "Z", "--mode", "add", "--ell", "1"}),
      {"game", "run", "--seq", "char:evens", "--ideal", "Z", "--ell", "0", "--kind", "pi", "--seed", "3"},
      small({"sample", "--seq", "cycle:3", "--ideal", "Z", "--trials", "2", "--kind", "pi"}),
      {"ideals", "list"}};
  for (const auto& c : cmds) {
    const auto a = run(c), b = run(c);
    CHECK(a.code == b.code);
    CHECK(a.out == b.out);
    CHECK_FALSE(a.out.empty());
  }
}
