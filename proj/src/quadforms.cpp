#include "murmur/quadforms.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "murmur/arith.hpp"

namespace murmur::quadforms {

namespace {

inline bool is_disc(long long d) {
  long long r = ((d % 4) + 4) % 4;
  return r == 0 || r == 1;
}

// weight in twelfths for one reduced triple: 6 for (k,0,k), 4 for (k,k,k),
// 12 otherwise
inline int form_weight12(long long a, long long b, long long c) {
  if (b == 0 && a == c) return 6;
  if (a == b && b == c) return 4;
  return 12;
}

}  // namespace

std::vector<FormTriple> reduced_forms(long long disc) {
  if (disc >= 0 || !is_disc(disc)) return {};
  std::vector<FormTriple> forms;
  for (long long a = 1; 3 * a * a <= -disc; ++a) {
    for (long long b = -a; b <= a; ++b) {
      long long num = b * b - disc;
      if (num % (4 * a) != 0) continue;
      long long c = num / (4 * a);
      if (c < a) continue;
      if (b < 0 && (-b == a || a == c)) continue;  // boundary forms keep b >= 0
      forms.push_back({a, b, c});
    }
  }
  std::sort(forms.begin(), forms.end(), [](const FormTriple& x, const FormTriple& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });
  return forms;
}

Twelfths hurwitz(long long disc) {
  if (disc > 0) return Twelfths(0);
  if (disc == 0) return Twelfths(-1);
  if (!is_disc(disc)) return Twelfths(0);
  long long total = 0;
  for (const FormTriple& f : reduced_forms(disc)) total += form_weight12(f.a, f.b, f.c);
  return Twelfths(total);
}

// ---------------------------------------------------------------------
// table sieve: every reduced triple (a, b, c) with n = 4ac - b^2 <= limit
// is visited once; the b >= 0 representative stands in for its negative
// twin (present unless b = 0, b = a, or a = c), so generic triples with
// 0 < b < a < c score twice.
// ---------------------------------------------------------------------

namespace {

inline void hurwitz_scan_row(long long a, long long limit, std::int32_t* num12, bool atomic) {
  for (long long b = 0; b <= a; ++b) {
    long long n0 = 4 * a * a - b * b;  // c starts at a; n0 shrinks as b grows
    if (n0 > limit) continue;
    for (long long c = a, n = n0; n <= limit; ++c, n += 4 * a) {
      int w = form_weight12(a, b, c);
      if (b > 0 && b < a && a < c) w *= 2;
      if (atomic) {
#pragma omp atomic
        num12[n] += w;
      } else {
        num12[n] += w;
      }
    }
  }
}

inline void hurwitz_check_limit(long long limit) {
  if (limit < 4) throw domain_error("hurwitz table limit must be >= 4");
  long long bytes = (limit + 1) * static_cast<long long>(sizeof(std::int32_t));
  if (bytes > arith::kTableBudgetBytes) throw resource_error("hurwitz table exceeds memory budget");
}

}  // namespace

HurwitzTable HurwitzTable::build(long long limit) {
  hurwitz_check_limit(limit);
  HurwitzTable t;
  t.limit = limit;
  t.num12.assign(static_cast<size_t>(limit) + 1, 0);
  const long long amax = static_cast<long long>(std::sqrt(static_cast<double>(limit) / 3.0)) + 1;
#pragma omp parallel for schedule(dynamic)
  for (long long a = 1; a <= amax; ++a) {
    if (3 * a * a <= limit) hurwitz_scan_row(a, limit, t.num12.data(), true);
  }
  t.num12[0] = -1;
  return t;
}

HurwitzTable HurwitzTable::build_serial(long long limit) {
  hurwitz_check_limit(limit);
  HurwitzTable t;
  t.limit = limit;
  t.num12.assign(static_cast<size_t>(limit) + 1, 0);
  for (long long a = 1; 3 * a * a <= limit; ++a) hurwitz_scan_row(a, limit, t.num12.data(), false);
  t.num12[0] = -1;
  return t;
}

std::pair<long long, int> class_number_fund(long long D) {
  if (!arith::is_fundamental_neg(D)) throw domain_error("class_number_fund expects -D fundamental");
  long long h = 0;
  for (const FormTriple& f : reduced_forms(-D)) {
    long long g = static_cast<long long>(gcd_i128(gcd_i128(f.a, f.b), f.c));
    if (g == 1) ++h;
  }
  int u = D == 3 ? 3 : (D == 4 ? 2 : 1);
  return {h, u};
}

}  // namespace murmur::quadforms
