#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <compare>
#include <string>
#include <string_view>

namespace idealconv {

// Exact rational used for every submeasure value and certificate.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

Rational parse_rational(std::string_view text);  // "3", "1/2", "-7/4"
std::string to_string(const Rational& r);
double to_double(const Rational& r);
Rational make_rational(std::int64_t num, std::int64_t den = 1);

// Small exact fraction for point coordinates. Denominators stay below 2^40 so
// distance comparisons fit in 128-bit products.
struct Frac {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Frac() = default;
  Frac(std::int64_t n, std::int64_t d = 1);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  Rational exact() const { return make_rational(num, den); }
  std::string str() const;

  friend bool operator==(const Frac& a, const Frac& b) { return a.num == b.num && a.den == b.den; }
  friend std::strong_ordering operator<=>(const Frac& a, const Frac& b) {
    const __int128 l = static_cast<__int128>(a.num) * b.den;
    const __int128 r = static_cast<__int128>(b.num) * a.den;
    return l <=> r;
  }
};

Frac parse_frac(std::string_view text);
Frac frac_from_rational(const Rational& r);

// |a - c| < radius, exactly.
bool within_open(const Frac& a, const Frac& c, const Frac& radius);
// c - half <= a < c + half, exactly (half-open cell).
bool within_cell(const Frac& a, const Frac& c, const Frac& half);

}  // namespace idealconv
