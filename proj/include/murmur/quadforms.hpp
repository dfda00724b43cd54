#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "murmur/errors.hpp"
#include "murmur/rational.hpp"

namespace murmur::quadforms {

// Positive definite integral binary quadratic form a x^2 + b xy + c y^2.
struct FormTriple {
  long long a, b, c;
  bool operator==(const FormTriple& o) const { return a == o.a && b == o.b && c == o.c; }
};

// Class-number-like quantities live in twelfths so they stay integers:
// the weights involved are 1, 1/2, 1/3 and the zero-argument value -1/12.
struct Twelfths {
  long long num12 = 0;

  Twelfths() = default;
  explicit Twelfths(long long n12) : num12(n12) {}

  Twelfths operator+(const Twelfths& o) const { return Twelfths(num12 + o.num12); }
  Twelfths& operator+=(const Twelfths& o) {
    num12 += o.num12;
    return *this;
  }
  bool operator==(const Twelfths& o) const { return num12 == o.num12; }
  Rational to_rational() const { return Rational(num12, 12); }
  bool is_integer() const { return num12 % 12 == 0; }
};

// All reduced forms of discriminant disc (< 0, = 0 or 1 mod 4), both
// primitive and imprimitive: |b| <= a <= c with b >= 0 when |b| = a or
// a = c.  Ordered lexicographically by (a, b).
std::vector<FormTriple> reduced_forms(long long disc);

// Hurwitz class number H(disc) for disc <= 0: reduced forms counted with
// weight 1/2 on multiples of x^2+y^2 and 1/3 on multiples of x^2+xy+y^2;
// H(0) = -1/12, and 0 for positive or non-discriminant arguments.
Twelfths hurwitz(long long disc);

// values[n] = 12 * H(-n) for 0 <= n <= limit, built by enumerating the
// reduced triples directly (one pass over a, b, c with 4ac - b^2 <= limit).
struct HurwitzTable {
  long long limit = 0;
  std::vector<std::int32_t> num12;

  static HurwitzTable build(long long limit);         // OpenMP over the a rows
  static HurwitzTable build_serial(long long limit);  // reference kept for tests

  bool covers(long long disc) const { return disc <= 0 && -disc <= limit; }
  Twelfths at(long long disc) const {
    if (!covers(disc)) throw domain_error("hurwitz table does not cover argument");
    return Twelfths(num12[static_cast<size_t>(-disc)]);
  }
};

// (h, u) for the field of discriminant -D: class number h counted over
// primitive reduced forms, unit weight u = 3, 2, 1 for D = 3, D = 4, else.
std::pair<long long, int> class_number_fund(long long D);

}  // namespace murmur::quadforms
