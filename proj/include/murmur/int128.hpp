#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include "murmur/errors.hpp"

namespace murmur {

using i128 = __int128_t;
using u128 = __uint128_t;

// Checked 128-bit ops.  All interior arithmetic is required to fit in a
// signed 128-bit word; anything wider is out of the supported range and
// surfaces as a resource error instead of wrapping.

inline i128 checked_add(i128 a, i128 b) {
  i128 r;
  if (__builtin_add_overflow(a, b, &r)) throw resource_error("int128 overflow in add");
  return r;
}

inline i128 checked_sub(i128 a, i128 b) {
  i128 r;
  if (__builtin_sub_overflow(a, b, &r)) throw resource_error("int128 overflow in sub");
  return r;
}

inline i128 checked_mul(i128 a, i128 b) {
  i128 r;
  if (__builtin_mul_overflow(a, b, &r)) throw resource_error("int128 overflow in mul");
  return r;
}

inline i128 abs_i128(i128 a) { return a < 0 ? -a : a; }

inline i128 gcd_i128(i128 a, i128 b) {
  a = abs_i128(a);
  b = abs_i128(b);
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline long long checked_cast_ll(i128 v) {
  if (v > std::numeric_limits<long long>::max() || v < std::numeric_limits<long long>::min())
    throw resource_error("int128 value does not fit in 64 bits");
  return static_cast<long long>(v);
}

inline std::string to_string_i128(i128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  u128 u = neg ? static_cast<u128>(-(v + 1)) + 1 : static_cast<u128>(v);
  char buf[48];
  int pos = 48;
  while (u > 0) {
    buf[--pos] = static_cast<char>('0' + static_cast<int>(u % 10));
    u /= 10;
  }
  std::string s(buf + pos, buf + 48);
  return neg ? "-" + s : s;
}

// Exact-ish conversion: split into high and low 64-bit halves so the
// long double never sees a value it cannot represent in one step.
inline long double to_long_double(i128 v) {
  bool neg = v < 0;
  u128 u = neg ? static_cast<u128>(-(v + 1)) + 1 : static_cast<u128>(v);
  long double hi = static_cast<long double>(static_cast<std::uint64_t>(u >> 64));
  long double lo = static_cast<long double>(static_cast<std::uint64_t>(u));
  long double r = hi * 18446744073709551616.0L + lo;
  return neg ? -r : r;
}

}  // namespace murmur
