#include "murmur/arith.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace murmur::arith {

// ---------------------------------------------------------------------
// factor table (linear sieve)
// ---------------------------------------------------------------------

FactorTable FactorTable::build(long long limit) {
  if (limit < 1) throw domain_error("factor table limit must be >= 1");
  long long bytes = (limit + 1) * static_cast<long long>(sizeof(std::uint32_t));
  if (bytes > kTableBudgetBytes) throw resource_error("factor table exceeds memory budget");
  if (limit > 0xFFFFFFFFLL) throw resource_error("factor table limit exceeds 32-bit spf range");

  FactorTable t;
  t.limit = limit;
  t.spf.assign(static_cast<size_t>(limit) + 1, 0);
  t.spf[0] = 1;
  if (limit >= 1) t.spf[1] = 1;
  std::vector<std::uint32_t> primes;
  for (long long i = 2; i <= limit; ++i) {
    if (t.spf[i] == 0) {
      t.spf[i] = static_cast<std::uint32_t>(i);
      primes.push_back(static_cast<std::uint32_t>(i));
    }
    for (std::uint32_t p : primes) {
      if (p > t.spf[i] || i * p > limit) break;
      t.spf[i * p] = p;
    }
  }
  return t;
}

Factorization factorize(long long n, const FactorTable& table) {
  if (n < 1) throw domain_error("factorize expects n >= 1");
  if (!table.covers(n)) throw domain_error("factor table does not cover n");
  Factorization f;
  while (n > 1) {
    long long p = table.spf[n];
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    f.factors.push_back({p, e});
  }
  return f;
}

Factorization factorize_trial(long long n) {
  if (n < 1) throw domain_error("factorize expects n >= 1");
  Factorization f;
  for (long long d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      int e = 0;
      while (n % d == 0) {
        n /= d;
        ++e;
      }
      f.factors.push_back({d, e});
    }
  }
  if (n > 1) f.factors.push_back({n, 1});
  return f;
}

int mobius(long long n, const FactorTable& table) {
  Factorization f = factorize(n, table);
  if (!f.squarefree()) return 0;
  return f.omega() % 2 == 0 ? 1 : -1;
}

// ---------------------------------------------------------------------
// Mertens: sum_{n<=x} mu(n).  Block sieve; each block divides out the
// primes <= sqrt(x) and flips sign per prime, zeroing on square factors.
// A leftover cofactor > 1 is a single extra prime.
// ---------------------------------------------------------------------

namespace {

long long mertens_block(long long lo, long long hi, const std::vector<long long>& primes) {
  const long long len = hi - lo + 1;
  std::vector<long long> rem(len);
  std::vector<signed char> mu(len, 1);
  std::iota(rem.begin(), rem.end(), lo);
  for (long long p : primes) {
    for (long long m = ((lo + p - 1) / p) * p; m <= hi; m += p) {
      long long i = m - lo;
      if (mu[i] == 0) continue;
      rem[i] /= p;
      mu[i] = static_cast<signed char>(-mu[i]);
      if (rem[i] % p == 0) mu[i] = 0;
    }
  }
  long long sum = 0;
  for (long long i = 0; i < len; ++i) {
    if (mu[i] == 0) continue;
    sum += rem[i] > 1 ? -mu[i] : mu[i];
  }
  return sum;
}

}  // namespace

long long mertens(long long x) {
  if (x < 1) throw domain_error("mertens expects x >= 1");
  long long root = static_cast<long long>(std::sqrt(static_cast<double>(x)));
  while (root * root > x) --root;
  while ((root + 1) * (root + 1) <= x) ++root;
  std::vector<long long> primes = primes_up_to(root);

  const long long block = 1 << 16;
  const long long nblocks = (x + block - 1) / block;
  long long total = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : total)
  for (long long b = 0; b < nblocks; ++b) {
    long long lo = std::max(1LL, b * block + 1);
    long long hi = std::min(x, (b + 1) * block);
    if (lo <= hi) total += mertens_block(lo, hi, primes);
  }
  return total;
}

long long mertens_serial(long long x) {
  if (x < 1) throw domain_error("mertens expects x >= 1");
  FactorTable t = FactorTable::build(x);
  long long total = 0;
  for (long long n = 1; n <= x; ++n) total += mobius(n, t);
  return total;
}

// ---------------------------------------------------------------------
// Kronecker symbol
// ---------------------------------------------------------------------

namespace {

// (a|2): 0 for even a, +1 for a = +-1 (mod 8), -1 for a = +-3 (mod 8)
inline int kron_two(long long a) {
  int r = static_cast<int>(a & 7);
  if (r < 0) r += 8;
  if (r % 2 == 0) return 0;
  return (r == 1 || r == 7) ? 1 : -1;
}

}  // namespace

int kronecker(long long a, long long n) {
  if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
  int result = 1;
  if (n < 0) {
    n = -n;
    if (a < 0) result = -result;
  }
  while (n % 2 == 0) {
    n /= 2;
    int k = kron_two(a);
    if (k == 0) return 0;
    result *= k;
  }
  // Jacobi loop on odd n > 0; the symbol is periodic in a mod n
  a %= n;
  if (a < 0) a += n;
  while (a != 0) {
    while (a % 2 == 0) {
      a /= 2;
      long long m = n % 8;
      if (m == 3 || m == 5) result = -result;  // (2|n)
    }
    std::swap(a, n);
    if (a % 4 == 3 && n % 4 == 3) result = -result;  // reciprocity
    a %= n;
  }
  return n == 1 ? result : 0;
}

long long euler_phi(long long n, const FactorTable& table) {
  Factorization f = factorize(n, table);
  long long phi = 1;
  for (const auto& [p, e] : f.factors) {
    long long pe = 1;
    for (int i = 1; i < e; ++i) pe *= p;
    phi *= pe * (p - 1);
  }
  return phi;
}

long long divisor_count(long long n) {
  Factorization f = factorize_trial(n);
  long long d = 1;
  for (const auto& pp : f.factors) d *= pp.e + 1;
  return d;
}

long long sigma_coprime(long long n, long long m) {
  if (n < 1) throw domain_error("sigma_coprime expects n >= 1");
  Factorization f = factorize_trial(n);
  i128 s = 1;
  for (const auto& [p, e] : f.factors) {
    if (m % p == 0) continue;
    i128 term = 1, pe = 1;
    for (int i = 1; i <= e; ++i) {
      pe = checked_mul(pe, p);
      term = checked_add(term, pe);
    }
    s = checked_mul(s, term);
  }
  return checked_cast_ll(s);
}

long long ideal_count(long long m, long long D, const FactorTable& table) {
  if (m < 1) throw domain_error("ideal_count expects m >= 1");
  if (!is_fundamental_neg(D)) throw domain_error("ideal_count expects -D fundamental");
  Factorization f = factorize(m, table);
  long long r = 1;
  for (const auto& [p, e] : f.factors) {
    int chi = kronecker(-D, p);
    if (chi == 1) {
      r *= e + 1;  // split: e+1 ideals of norm p^e
    } else if (chi == -1) {
      if (e % 2 == 1) return 0;  // inert prime only contributes at even powers
    }
    // chi == 0 (ramified): exactly one ideal at every power
  }
  return r;
}

bool is_squarefree(long long n, const FactorTable& table) {
  return factorize(n, table).squarefree();
}

bool is_fundamental_neg(long long D) {
  if (D <= 0) return false;
  auto squarefree_trial = [](long long n) {
    for (long long d = 2; d * d <= n; ++d)
      if (n % (d * d) == 0) return false;
    return true;
  };
  if (D % 4 == 3) return squarefree_trial(D);
  if (D % 4 == 0) {
    long long d = D / 4;
    return (d % 4 == 1 || d % 4 == 2) && squarefree_trial(d);
  }
  return false;
}

DiscriminantClass classify_discriminant(long long D) {
  if (D < 3) return DiscriminantClass::NotClassified;
  auto squarefree_trial = [](long long n) {
    for (long long d = 2; d * d <= n; ++d)
      if (n % (d * d) == 0) return false;
    return true;
  };
  if (D % 2 == 1) {
    if (!squarefree_trial(D)) return DiscriminantClass::NotClassified;
    long long r = ((-D) % 8 + 8) % 8;
    if (r == 1) return DiscriminantClass::Odd1Mod8;
    if (r == 5) return DiscriminantClass::Odd5Mod8;
    return DiscriminantClass::NotClassified;
  }
  if (D % 4 == 0) {
    long long d = D / 4;
    if (d % 2 == 0 || !squarefree_trial(d)) return DiscriminantClass::NotClassified;
    return d % 4 == 1 ? DiscriminantClass::Even1Mod4 : DiscriminantClass::Even3Mod4;
  }
  return DiscriminantClass::NotClassified;
}

const char* discriminant_class_tag(DiscriminantClass c) {
  switch (c) {
    case DiscriminantClass::Odd1Mod8: return "odd1mod8";
    case DiscriminantClass::Odd5Mod8: return "odd5mod8";
    case DiscriminantClass::Even1Mod4: return "even1mod4";
    case DiscriminantClass::Even3Mod4: return "even3mod4";
    default: return "unclassified";
  }
}

// ---------------------------------------------------------------------
// xi
// ---------------------------------------------------------------------

std::optional<Rational> xi_resolved_factor(long long delta, long long q) {
  // Calibrated against dimension-one levels where the plain trace equals
  // a known a_p; the acceptance harness re-derives these factors from
  // curve data and cross-checks every entry it can reach.
  //
  // Write delta = D0 F^2 with D0 fundamental.  The weighted class numbers
  // obey h_w(D0 f^2) = h_w(D0) f prod_{l|f}(1 - (D0|l)/l), so inside
  // H(delta) the conductor strata at q have masses psi(q^E) with
  // psi(q^E) = q^E - eps q^(E-1), eps = kronecker(D0, q), E = 0..V,
  // V = v_q(F).  Only the locally fundamental stratum carries weight,
  // and that weight is the determined rule applied to D0:
  //   xi = (kronecker(D0, q) - 1) / sum_E psi(q^E)
  // Everything needed is local at q: v = v_q(delta) and the residue of
  // rest = delta / q^v pin eps and V without factoring delta.
  long long v = 0;
  long long rest = delta;
  while (rest % q == 0) {
    rest /= q;
    ++v;
  }
  if (v < 2) return std::nullopt;  // not this branch
  long long strata;  // V
  int eps;
  if (q == 2) {
    long long r8 = ((rest % 8) + 8) % 8;
    if (v % 2 == 1) {
      strata = (v - 3) / 2;  // D0 = 8m
      eps = 0;
    } else if (r8 == 1 || r8 == 5) {
      strata = v / 2;  // D0 odd
      eps = r8 == 1 ? 1 : -1;
    } else {
      strata = (v - 2) / 2;  // D0 = 4m
      eps = 0;
    }
  } else if (v % 2 == 1) {
    strata = (v - 1) / 2;  // q ramifies in D0
    eps = 0;
  } else {
    strata = v / 2;
    eps = kronecker(rest, q);
  }
  if (eps == 1) return Rational(0);
  i128 qpow = 1;
  for (long long e = 0; e < strata; ++e) qpow = checked_mul(qpow, q);
  // mass = 1 + (q - eps)(q^V - 1)/(q - 1)
  Rational mass = Rational(1) + Rational(checked_mul(i128(q - eps), checked_sub(qpow, 1)), q - 1);
  return Rational(eps - 1) / mass;
}

bool xi_eval(long long delta, long long N, const FactorTable& table, const XiPolicy& policy,
             Rational* out, std::vector<XiTerm>* missing) {
  if (delta >= 0 || (((delta % 4) + 4) % 4 != 0 && ((delta % 4) + 4) % 4 != 1))
    throw domain_error("xi expects a negative discriminant (0 or 1 mod 4)");
  Factorization f = factorize(N, table);
  if (!f.squarefree()) throw domain_error("xi expects squarefree N");
  Rational acc(1);
  bool ok = true;
  for (const auto& [q, e] : f.factors) {
    (void)e;
    long long v = 0;
    long long rest = delta;
    while (rest % q == 0) {
      rest /= q;
      ++v;
    }
    Rational factor;
    if (v <= 1) {
      factor = Rational(kronecker(delta, q) - 1);
    } else {
      auto it = policy.overrides.find({q, delta});
      if (it != policy.overrides.end()) {
        factor = it->second;
      } else if (policy.mode == XiMode::Resolved) {
        auto r = xi_resolved_factor(delta, q);
        if (!r) {
          ok = false;
          if (missing) missing->push_back({0, delta, q});
          continue;
        }
        factor = *r;
      } else {
        ok = false;
        if (missing) missing->push_back({0, delta, q});
        continue;
      }
    }
    acc = acc * factor;
  }
  if (ok && out) *out = acc;
  return ok;
}

Rational xi(long long delta, long long N, const FactorTable& table, const XiPolicy& policy) {
  Rational v;
  std::vector<XiTerm> missing;
  if (!xi_eval(delta, N, table, policy, &v, &missing)) throw unresolved_xi_error(std::move(missing));
  return v;
}

std::vector<long long> primes_up_to(long long n) {
  std::vector<long long> primes;
  if (n < 2) return primes;
  std::vector<bool> comp(static_cast<size_t>(n) + 1, false);
  for (long long i = 2; i <= n; ++i) {
    if (!comp[i]) {
      primes.push_back(i);
      for (long long j = i * i; j <= n; j += i) comp[j] = true;
    }
  }
  return primes;
}

}  // namespace murmur::arith
