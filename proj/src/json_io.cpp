#include "idealconv/json_io.hpp"

#include "idealconv/error.hpp"

namespace idealconv {

json witness_to_json(const WitnessIntervals& w, std::uint64_t iota_limit) {
  json gen{{"kind", to_string(w.generator())}};
  if (w.generator() == WitnessGenerator::Geometric) {
    gen["start"] = w.start();
    gen["q"] = rational_to_json(w.ratio_q());
  }
  json out{{"rule", to_string(w.rule())}, {"q0", rational_to_json(w.q0())}, {"generator", gen}};
  if (!w.ideal().empty()) out["ideal"] = w.ideal();
  // Tables are data, so they are always written in full.
  if (w.generator() == WitnessGenerator::Table) {
    out["iota"] = w.iota_prefix(std::numeric_limits<std::uint64_t>::max());
  } else if (iota_limit > 0) {
    out["iota"] = w.iota_prefix(iota_limit);
  }
  return out;
}

WitnessIntervals witness_from_json(const json& j) {
  try {
    const auto& gen = j.at("generator");
    const auto kind = witness_generator_from_string(gen.at("kind").get<std::string>());
    WitnessIntervals w = WitnessIntervals::unit();
    switch (kind) {
      case WitnessGenerator::Geometric:
        w = WitnessIntervals::geometric(gen.at("start").get<std::uint64_t>(), rational_from_json(gen.at("q")));
        break;
      case WitnessGenerator::Unit: w = WitnessIntervals::unit(); break;
      case WitnessGenerator::RowCoverage: w = WitnessIntervals::row_coverage(); break;
      case WitnessGenerator::Table:
        w = WitnessIntervals::table(j.at("iota").get<std::vector<std::uint64_t>>(), CertRule::PhiBlock, 1);
        break;
    }
    return w.with_certificate(cert_rule_from_string(j.at("rule").get<std::string>()), rational_from_json(j.at("q0")),
                              j.value("ideal", std::string{}));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed witness JSON: ") + e.what());
  }
}

json selector_to_json(const BlockSelector& s) {
  switch (s.kind()) {
    case SelectorKind::All: return json{{"kind", "all"}};
    case SelectorKind::EveryKth: return json{{"kind", "every_kth"}, {"k", s.k()}};
    case SelectorKind::IndexSet: return json{{"kind", "index_set"}, {"indices", s.indices().to_json()}};
  }
  return {};
}

BlockSelector selector_from_json(const json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "all") return BlockSelector::all();
    if (kind == "every_kth") return BlockSelector::every_kth(j.at("k").get<std::uint64_t>());
    if (kind == "index_set") return BlockSelector::index_set(NatSet::from_json(j.at("indices")));
    throw Error(ErrorCode::InvalidArgument, "unknown selector kind: " + kind);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed selector JSON: ") + e.what());
  }
}

Rational rational_from_json(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  throw Error(ErrorCode::InvalidArgument, "rational must be a string like \"1/2\"");
}

std::string dump_canonical(const json& j) { return j.dump(2) + "\n"; }

}  // namespace idealconv
