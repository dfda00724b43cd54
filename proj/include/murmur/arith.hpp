#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "murmur/errors.hpp"
#include "murmur/int128.hpp"
#include "murmur/rational.hpp"

namespace murmur::arith {

// Combined in-memory budget for sieve tables.  Limits are explicit
// arguments everywhere; this cap just keeps a typo from eating the box.
inline constexpr long long kTableBudgetBytes = 3LL << 30;

struct PrimePower {
  long long p;
  int e;
};

struct Factorization {
  std::vector<PrimePower> factors;  // increasing p
  bool squarefree() const {
    for (const auto& f : factors)
      if (f.e > 1) return false;
    return true;
  }
  int omega() const { return static_cast<int>(factors.size()); }
  bool is_prime() const { return factors.size() == 1 && factors[0].e == 1; }
};

// Smallest-prime-factor table from a linear sieve; spf[0] = spf[1] = 1.
struct FactorTable {
  long long limit = 0;
  std::vector<std::uint32_t> spf;

  static FactorTable build(long long limit);
  bool covers(long long n) const { return n >= 0 && n <= limit; }
};

Factorization factorize(long long n, const FactorTable& table);
Factorization factorize_trial(long long n);  // table-free, O(sqrt n)

int mobius(long long n, const FactorTable& table);

// Sum of mobius up to x, block-sieved with primes <= sqrt(x); blocks are
// independent so the scan parallelizes.  mertens_serial is the plain
// whole-array reference kept for testing and benchmarks.
long long mertens(long long x);
long long mertens_serial(long long x);

// Kronecker symbol (a|n) for all integers, including (a|0) = [|a| = 1],
// (a|-1) = sign(a) extended with (0|-1) = 1, and the (a|2) rule by a mod 8.
int kronecker(long long a, long long n);

long long euler_phi(long long n, const FactorTable& table);

long long divisor_count(long long n);

// sum of divisors of n coprime to m
long long sigma_coprime(long long n, long long m);

// number of ideals of norm m in Q(sqrt(-D)), -D a fundamental discriminant
long long ideal_count(long long m, long long D, const FactorTable& table);

bool is_squarefree(long long n, const FactorTable& table);

// true when -D is a fundamental discriminant (D > 0)
bool is_fundamental_neg(long long D);

enum class DiscriminantClass { Odd1Mod8, Odd5Mod8, Even1Mod4, Even3Mod4, NotClassified };

// Families of negative discriminants -D keyed by congruence data:
// odd squarefree D with -D = 1 or 5 (mod 8), or D = 4d with d odd
// squarefree split by d mod 4.
DiscriminantClass classify_discriminant(long long D);

const char* discriminant_class_tag(DiscriminantClass c);

// ---------------------------------------------------------------------
// xi: the multiplicative local correction attached to a discriminant
// delta < 0 and a squarefree level N coprime to the trace prime.  At a
// level prime q with q^2 not dividing delta the factor is
// kronecker(delta, q) - 1.  The q^2 | delta branch averages the local
// weights over the conductor strata inside H(delta), so its value is a
// rational with denominator dividing the local stratum mass; policy
// decides how to evaluate it:
//   StrictPartial  - refuse, carrying (delta, q) in the error
//   Resolved       - use the per-(q, v_q(delta), residue) factor rule
//                    (calibrated against known traces)
// ---------------------------------------------------------------------

enum class XiMode { StrictPartial, Resolved };

struct XiPolicy {
  XiMode mode = XiMode::StrictPartial;
  // explicit overrides keyed by (q, delta); consulted before the rules
  std::map<std::pair<long long, long long>, Rational> overrides;

  static XiPolicy strict() { return XiPolicy{}; }
  static XiPolicy resolved() { return XiPolicy{XiMode::Resolved, {}}; }
};

// Built-in resolved factor for q^2 | delta, or nullopt when the
// configuration does not cover the branch.
std::optional<Rational> xi_resolved_factor(long long delta, long long q);

// Collecting evaluator: multiplies per-prime factors of N; unresolved
// branches are appended to `missing` (with s = 0) and the value is
// reported unusable via the return flag.
bool xi_eval(long long delta, long long N, const FactorTable& table, const XiPolicy& policy,
             Rational* out, std::vector<XiTerm>* missing);

// Throwing wrapper around xi_eval.
Rational xi(long long delta, long long N, const FactorTable& table, const XiPolicy& policy);

std::vector<long long> primes_up_to(long long n);

}  // namespace murmur::arith
