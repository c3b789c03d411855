#pragma once

#include "idealconv/natset.hpp"
#include "idealconv/witness.hpp"

#include "json.hpp"

namespace idealconv {

using nlohmann::json;

json witness_to_json(const WitnessIntervals& w, std::uint64_t iota_limit = std::uint64_t{1} << 20);
WitnessIntervals witness_from_json(const json& j);

json selector_to_json(const BlockSelector& s);
BlockSelector selector_from_json(const json& j);

// Rationals are serialized as strings ("1/2") so they survive any JSON reader.
inline json rational_to_json(const Rational& r) { return to_string(r); }
Rational rational_from_json(const json& j);

// Canonical text: sorted keys, two-space indent, trailing newline.
std::string dump_canonical(const json& j);

}  // namespace idealconv
