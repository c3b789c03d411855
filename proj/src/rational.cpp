#include "idealconv/rational.hpp"

#include "idealconv/error.hpp"

#include <charconv>
#include <numeric>

namespace idealconv {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::HorizonExceeded: return "HorizonExceeded";
    case ErrorCode::DepthExceeded: return "DepthExceeded";
    case ErrorCode::UnknownIdeal: return "UnknownIdeal";
    case ErrorCode::NotRepresentable: return "NotRepresentable";
    case ErrorCode::BlockSearchExceeded: return "BlockSearchExceeded";
    case ErrorCode::WitnessRefuted: return "WitnessRefuted";
    case ErrorCode::NotAnalyticP: return "NotAnalyticP";
    case ErrorCode::ExhaustedA: return "ExhaustedA";
    case ErrorCode::NotALimitPoint: return "NotALimitPoint";
    case ErrorCode::HypothesisFailed: return "HypothesisFailed";
    case ErrorCode::BijectivityOverflow: return "BijectivityOverflow";
    case ErrorCode::SupplyExhausted: return "SupplyExhausted";
    case ErrorCode::MassUnavailable: return "MassUnavailable";
  }
  return "Unknown";
}

namespace {

BigInt parse_int(std::string_view s) {
  if (s.empty()) throw Error(ErrorCode::InvalidArgument, "empty integer");
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) throw Error(ErrorCode::InvalidArgument, "bad integer: " + std::string(s));
  for (std::size_t j = i; j < s.size(); ++j) {
    if (s[j] < '0' || s[j] > '9') throw Error(ErrorCode::InvalidArgument, "bad integer: " + std::string(s));
  }
  return BigInt(std::string(s));
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    // Also accept decimal literals like 0.25 (exactly).
    const auto dot = text.find('.');
    if (dot == std::string_view::npos) return Rational(parse_int(text));
    std::string digits(text.substr(0, dot));
    std::string frac(text.substr(dot + 1));
    BigInt den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const bool neg = !digits.empty() && digits[0] == '-';
    if (digits.empty() || digits == "-" || digits == "+") digits += "0";
    BigInt whole = parse_int(digits);
    BigInt part = frac.empty() ? BigInt(0) : parse_int(frac);
    BigInt num = (whole < 0 ? -whole : whole) * den + part;
    if (neg) num = -num;
    return Rational(num, den);
  }
  BigInt num = parse_int(text.substr(0, slash));
  BigInt den = parse_int(text.substr(slash + 1));
  if (den == 0) throw Error(ErrorCode::InvalidArgument, "zero denominator: " + std::string(text));
  return Rational(num, den);
}

std::string to_string(const Rational& r) {
  const BigInt n = boost::multiprecision::numerator(r);
  const BigInt d = boost::multiprecision::denominator(r);
  if (d == 1) return n.str();
  return n.str() + "/" + d.str();
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

Rational make_rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorCode::InvalidArgument, "zero denominator");
  return Rational(BigInt(num), BigInt(den));
}

Frac::Frac(std::int64_t n, std::int64_t d) {
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const std::int64_t g = std::gcd(n < 0 ? -n : n, d);
  num = g ? n / g : n;
  den = g ? d / g : d;
  if (den > (std::int64_t{1} << 32)) {
    throw Error(ErrorCode::InvalidArgument, "coordinate denominator above 2^32");
  }
}

std::string Frac::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

Frac parse_frac(std::string_view text) { return frac_from_rational(parse_rational(text)); }

Frac frac_from_rational(const Rational& r) {
  const BigInt n = boost::multiprecision::numerator(r);
  const BigInt d = boost::multiprecision::denominator(r);
  const BigInt limit = BigInt(1) << 62;
  if (n >= limit || -n >= limit || d >= limit) {
    throw Error(ErrorCode::InvalidArgument, "coordinate out of range: " + to_string(r));
  }
  return Frac(n.convert_to<std::int64_t>(), d.convert_to<std::int64_t>());
}

bool within_open(const Frac& a, const Frac& c, const Frac& radius) {
  __int128 diff = static_cast<__int128>(a.num) * c.den - static_cast<__int128>(c.num) * a.den;
  if (diff < 0) diff = -diff;
  const __int128 lhs = diff * radius.den;
  const __int128 rhs = static_cast<__int128>(radius.num) * a.den * c.den;
  return lhs < rhs;
}

bool within_cell(const Frac& a, const Frac& c, const Frac& half) {
  // a - c in [-half, half)
  const __int128 diff = static_cast<__int128>(a.num) * c.den - static_cast<__int128>(c.num) * a.den;
  const __int128 lhs = diff * half.den;
  const __int128 bound = static_cast<__int128>(half.num) * a.den * c.den;
  return lhs >= -bound && lhs < bound;
}

}  // namespace idealconv
