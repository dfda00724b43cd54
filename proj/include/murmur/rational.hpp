#pragma once

#include <string>

#include "murmur/int128.hpp"

namespace murmur {

// Exact rational on checked 128-bit integers.  Always normalized:
// den > 0, gcd(num, den) = 1.
struct Rational {
  i128 num = 0;
  i128 den = 1;

  Rational() = default;
  Rational(i128 n, i128 d) : num(n), den(d) { normalize(); }
  Rational(i128 n) : num(n), den(1) {}       // NOLINT: implicit by design
  Rational(long long n) : num(n), den(1) {}  // NOLINT
  Rational(int n) : num(n), den(1) {}        // NOLINT

  void normalize() {
    if (den == 0) throw domain_error("rational with zero denominator");
    if (den < 0) {
      num = checked_sub(0, num);
      den = checked_sub(0, den);
    }
    i128 g = gcd_i128(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  bool is_zero() const { return num == 0; }
  bool is_integer() const { return den == 1; }

  Rational operator+(const Rational& o) const {
    i128 g = gcd_i128(den, o.den);
    i128 dl = den / g;
    i128 dr = o.den / g;
    i128 n = checked_add(checked_mul(num, dr), checked_mul(o.num, dl));
    i128 d = checked_mul(den, dr);
    return Rational(n, d);
  }
  Rational operator-(const Rational& o) const { return *this + Rational(checked_sub(0, o.num), o.den); }
  Rational operator-() const { return Rational(checked_sub(0, num), den); }
  Rational operator*(const Rational& o) const {
    i128 g1 = gcd_i128(num, o.den);
    i128 g2 = gcd_i128(o.num, den);
    return Rational(checked_mul(num / g1, o.num / g2), checked_mul(den / g2, o.den / g1));
  }
  Rational operator/(const Rational& o) const {
    if (o.num == 0) throw domain_error("rational division by zero");
    return *this * Rational(o.den, o.num);
  }

  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const {
    return checked_mul(num, o.den) < checked_mul(o.num, den);
  }
  bool operator<=(const Rational& o) const { return *this < o || *this == o; }
  bool operator>(const Rational& o) const { return o < *this; }
  bool operator>=(const Rational& o) const { return o <= *this; }

  long double to_long_double_value() const {
    return to_long_double(num) / to_long_double(den);
  }
  double to_double() const { return static_cast<double>(to_long_double_value()); }

  std::string str() const {
    if (den == 1) return to_string_i128(num);
    return to_string_i128(num) + "/" + to_string_i128(den);
  }
};

}  // namespace murmur
