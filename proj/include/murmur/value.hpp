#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "murmur/rational.hpp"

namespace murmur {

// Exact linear combination  sum_n c_n * sqrt(n)  with rational c_n and
// squarefree radicands n >= 1 (n = 1 is the rational part).  sqrt(n) for
// distinct squarefree n are linearly independent over Q, so the map form
// is canonical: equality of maps is equality of values.  Closed under
// addition, rational scaling, and multiplication
// (sqrt(n)sqrt(m) = g*sqrt(nm/g^2) with g = gcd stays squarefree).
class RootSum {
 public:
  RootSum() = default;
  explicit RootSum(const Rational& r) {
    if (!r.is_zero()) terms_[1] = r;
  }

  // radicand reduced by extracting the largest square divisor
  static RootSum sqrt_of(long long n, const Rational& coeff = Rational(1)) {
    if (n <= 0) throw domain_error("sqrt radicand must be positive");
    long long f = 1, m = n;
    for (long long d = 2; d * d <= m; ++d) {
      while (m % (d * d) == 0) {
        m /= d * d;
        f *= d;
      }
    }
    RootSum s;
    s.add_term(m, coeff * Rational(f));
    return s;
  }

  void add_term(long long radicand, const Rational& coeff) {
    if (coeff.is_zero()) return;
    auto it = terms_.find(radicand);
    if (it == terms_.end()) {
      terms_.emplace(radicand, coeff);
    } else {
      it->second = it->second + coeff;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  RootSum operator+(const RootSum& o) const {
    RootSum r = *this;
    for (const auto& [n, c] : o.terms_) r.add_term(n, c);
    return r;
  }
  RootSum operator-(const RootSum& o) const {
    RootSum r = *this;
    for (const auto& [n, c] : o.terms_) r.add_term(n, -c);
    return r;
  }
  RootSum scaled(const Rational& k) const {
    RootSum r;
    if (k.is_zero()) return r;
    for (const auto& [n, c] : terms_) r.terms_.emplace(n, c * k);
    return r;
  }
  RootSum operator*(const RootSum& o) const {
    RootSum r;
    for (const auto& [n, cn] : terms_) {
      for (const auto& [m, cm] : o.terms_) {
        long long g = static_cast<long long>(gcd_i128(n, m));
        long long rad = (n / g) * (m / g);
        r.add_term(rad, cn * cm * Rational(g));
      }
    }
    return r;
  }

  bool operator==(const RootSum& o) const { return terms_ == o.terms_; }
  bool operator!=(const RootSum& o) const { return !(*this == o); }

  bool is_zero() const { return terms_.empty(); }
  bool is_rational() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == 1);
  }
  Rational rational_part() const {
    auto it = terms_.find(1);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  long double to_long_double_value() const {
    long double acc = 0.0L;
    for (const auto& [n, c] : terms_)
      acc += c.to_long_double_value() * std::sqrt(static_cast<long double>(n));
    return acc;
  }

  const std::map<long long, Rational>& terms() const { return terms_; }

 private:
  std::map<long long, Rational> terms_;
};

// Exact series value held as a quotient of two RootSums.  Rendered to
// floating point only at the output boundary.
struct Value {
  RootSum num;
  RootSum den{Rational(1)};

  Value() = default;
  Value(RootSum n, RootSum d) : num(std::move(n)), den(std::move(d)) {
    if (den.is_zero()) throw domain_error("value with zero denominator");
  }
  static Value rational(const Rational& r) { return Value(RootSum(r), RootSum(Rational(1))); }

  bool is_rational() const { return num.is_rational() && den.is_rational(); }
  Rational as_rational() const {
    if (!is_rational()) throw domain_error("value is not rational");
    return num.rational_part() / den.rational_part();
  }

  // cross-multiplied exact comparison
  bool exact_eq(const Value& o) const { return num * o.den == o.num * den; }

  Value operator+(const Value& o) const {
    if (den == o.den) return Value(num + o.num, den);
    return Value(num * o.den + o.num * den, den * o.den);
  }
  Value operator-(const Value& o) const {
    if (den == o.den) return Value(num - o.num, den);
    return Value(num * o.den - o.num * den, den * o.den);
  }
  Value scaled(const Rational& k) const { return Value(num.scaled(k), den); }

  double to_double() const {
    return static_cast<double>(num.to_long_double_value() / den.to_long_double_value());
  }
};

}  // namespace murmur
