#include <map>

#include "doctest.h"
#include "murmur/quadforms.hpp"

using namespace murmur;
using namespace murmur::quadforms;

TEST_CASE("reduced forms at small discriminants") {
  // disc -15: x^2+xy+4y^2 and 2x^2+xy+2y^2
  auto f15 = reduced_forms(-15);
  REQUIRE(f15.size() == 2);
  CHECK(f15[0] == FormTriple{1, 1, 4});
  CHECK(f15[1] == FormTriple{2, 1, 2});

  // disc -23: principal form plus the (2, +-1, 3) pair
  auto f23 = reduced_forms(-23);
  REQUIRE(f23.size() == 3);
  CHECK(f23[0] == FormTriple{1, 1, 6});
  CHECK(f23[1] == FormTriple{2, -1, 3});
  CHECK(f23[2] == FormTriple{2, 1, 3});

  // boundary conventions: (3,3,3) for disc -27, (2,2,2) inside disc -12
  auto f27 = reduced_forms(-27);
  REQUIRE(f27.size() == 2);
  CHECK(f27[0] == FormTriple{1, 1, 7});
  CHECK(f27[1] == FormTriple{3, 3, 3});
  auto f12 = reduced_forms(-12);
  REQUIRE(f12.size() == 2);
  CHECK(f12[0] == FormTriple{1, 0, 3});
  CHECK(f12[1] == FormTriple{2, 2, 2});

  CHECK(reduced_forms(0).empty());
  CHECK(reduced_forms(-5).empty());  // -5 = 3 mod 4 is not a discriminant
  CHECK(reduced_forms(7).empty());
}

TEST_CASE("forms represent their discriminant") {
  for (long long disc = -400; disc < 0; ++disc) {
    long long r = ((disc % 4) + 4) % 4;
    if (r != 0 && r != 1) continue;
    auto forms = reduced_forms(disc);
    for (const auto& f : forms) {
      CHECK(f.b * f.b - 4 * f.a * f.c == disc);
      CHECK(f.a >= 1);
      CHECK(f.a <= f.c);
      CHECK(-f.a <= f.b);
      CHECK(f.b <= f.a);
      if (f.b < 0) {
        CHECK(-f.b < f.a);
        CHECK(f.a < f.c);
      }
    }
    for (size_t i = 1; i < forms.size(); ++i) {
      bool ordered = forms[i - 1].a < forms[i].a ||
                     (forms[i - 1].a == forms[i].a && forms[i - 1].b < forms[i].b);
      CHECK(ordered);
    }
  }
}

TEST_CASE("hurwitz numbers match the classical table") {
  // frozen reference values, 12 H(-n) keyed by n
  const std::map<long long, long long> twelve_h = {
      {0, -1},  {3, 4},   {4, 6},   {7, 12},  {8, 12},  {11, 12}, {12, 16},
      {15, 24}, {16, 18}, {19, 12}, {20, 24}, {23, 36}, {24, 24}, {27, 16},
      {28, 24}, {31, 36}, {32, 36}, {35, 24}, {36, 30}, {39, 48}, {40, 24},
      {43, 12}, {44, 48}, {47, 60}, {48, 40}, {67, 12}, {71, 84}, {163, 12}};
  for (const auto& [n, v] : twelve_h) CHECK(hurwitz(-n).num12 == v);
  CHECK(hurwitz(5).num12 == 0);
  CHECK(hurwitz(-1).num12 == 0);   // -1 = 3 mod 4 is not a discriminant
  CHECK(hurwitz(-2).num12 == 0);
}

TEST_CASE("hurwitz table agrees with direct evaluation") {
  const long long limit = 20000;
  HurwitzTable par = HurwitzTable::build(limit);
  HurwitzTable ser = HurwitzTable::build_serial(limit);
  REQUIRE(par.limit == limit);
  CHECK(par.num12 == ser.num12);
  for (long long n = 0; n <= 300; ++n) CHECK(par.at(-n).num12 == hurwitz(-n).num12);
  for (long long n = limit - 50; n <= limit; ++n) CHECK(par.at(-n).num12 == hurwitz(-n).num12);
  CHECK(par.covers(-limit));
  CHECK_FALSE(par.covers(-limit - 1));
  CHECK_FALSE(par.covers(5));
  CHECK_THROWS_AS(par.at(-limit - 1), domain_error);
}

TEST_CASE("mass identity over the trace window") {
  // sum over all s^2 <= 4p of H(s^2 - 4p) equals 2p at primes
  HurwitzTable table = HurwitzTable::build(4 * 200);
  for (long long p : {2LL, 3LL, 5LL, 7LL, 11LL, 13LL, 97LL, 199LL}) {
    Rational sum(0);
    for (long long s = 0; s * s <= 4 * p; ++s) {
      Rational h = table.at(s * s - 4 * p).to_rational();
      sum = sum + (s > 0 ? h + h : h);
    }
    CHECK(sum == Rational(2 * p));
  }
}

TEST_CASE("fundamental class numbers") {
  const std::map<long long, long long> h_table = {
      {3, 1},  {4, 1},  {7, 1},  {8, 1},  {11, 1}, {15, 2}, {19, 1},  {20, 2},
      {23, 3}, {24, 2}, {31, 3}, {35, 2}, {39, 4}, {40, 2}, {43, 1},  {47, 5},
      {52, 2}, {56, 4}, {67, 1}, {71, 7}, {84, 4}, {88, 2}, {120, 4}, {163, 1}};
  for (const auto& [D, h] : h_table) {
    auto [got_h, got_u] = class_number_fund(D);
    CHECK(got_h == h);
    int want_u = D == 3 ? 3 : (D == 4 ? 2 : 1);
    CHECK(got_u == want_u);
  }
  CHECK_THROWS_AS(class_number_fund(5), domain_error);
  CHECK_THROWS_AS(class_number_fund(12), domain_error);
}
