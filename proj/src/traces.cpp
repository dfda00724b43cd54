#include "murmur/traces.hpp"

#include <stdexcept>

namespace murmur::traces {

namespace {

inline void check_level_prime(long long N, long long p, const arith::FactorTable& table) {
  if (N < 1 || p < 2) throw domain_error("trace expects N >= 1 and prime p");
  if (!arith::is_squarefree(N, table)) throw domain_error("trace expects squarefree level");
  if (gcd_i128(N, p) != 1) throw domain_error("trace expects gcd(N, p) = 1");
}

}  // namespace

long long genus_x0(long long N) {
  if (N < 1) throw domain_error("genus_x0 expects N >= 1");
  arith::Factorization f = arith::factorize_trial(N);

  long long mu_index = N;  // [SL2(Z) : Gamma0(N)] = N prod (1 + 1/p)
  for (const auto& [p, e] : f.factors) {
    (void)e;
    mu_index = mu_index / p * (p + 1);
  }

  long long nu2 = 1;  // elliptic points of order 2
  if (N % 4 == 0) {
    nu2 = 0;
  } else {
    for (const auto& [p, e] : f.factors) {
      (void)e;
      nu2 *= 1 + arith::kronecker(-4, p);
    }
  }

  long long nu3 = 1;  // elliptic points of order 3
  if (N % 9 == 0) {
    nu3 = 0;
  } else {
    for (const auto& [p, e] : f.factors) {
      (void)e;
      nu3 *= 1 + arith::kronecker(-3, p);
    }
  }

  long long cusps = 0;
  for (long long d = 1; d * d <= N; ++d) {
    if (N % d != 0) continue;
    long long dd = N / d;
    auto phi_gcd = [](long long a, long long b) {
      long long g = static_cast<long long>(gcd_i128(a, b));
      long long phi = 1;
      for (const auto& [p, e] : arith::factorize_trial(g).factors) {
        long long pe = 1;
        for (int i = 1; i < e; ++i) pe *= p;
        phi *= pe * (p - 1);
      }
      return phi;
    };
    cusps += phi_gcd(d, N / d);
    if (dd != d) cusps += phi_gcd(dd, N / dd);
  }

  // 12g = 12 + mu - 3 nu2 - 4 nu3 - 6 nu_inf
  long long twelve_g = 12 + mu_index - 3 * nu2 - 4 * nu3 - 6 * cusps;
  if (twelve_g % 12 != 0) throw std::logic_error("genus formula gave a non-integer");
  return twelve_g / 12;
}

long long dim_new(long long N, const arith::FactorTable& table) {
  if (!arith::is_squarefree(N, table)) throw domain_error("dim_new expects squarefree level");
  arith::Factorization f = arith::factorize(N, table);
  int k = f.omega();
  long long dim = 0;
  // walk the squarefree divisors d of N; the sieve weight is (-2)^omega(d)
  for (int mask = 0; mask < (1 << k); ++mask) {
    long long d = 1;
    long long w = 1;
    for (int i = 0; i < k; ++i) {
      if (mask & (1 << i)) {
        d *= f.factors[i].p;
        w *= -2;
      }
    }
    dim += w * genus_x0(N / d);
  }
  return dim;
}

long long tr_tp(long long N, long long p, const TraceContext& ctx, const arith::XiPolicy& policy) {
  const arith::FactorTable& table = *ctx.factors;
  check_level_prime(N, p, table);

  Rational sum12(0);  // sum over s of xi * 12 H; xi factors can be rational
  std::vector<XiTerm> missing;
  for (long long s = 0; s * s <= 4 * p; ++s) {
    long long delta = s * s - 4 * p;
    Rational xi_val;
    std::vector<XiTerm> miss_here;
    bool ok = arith::xi_eval(delta, N, table, policy, &xi_val, &miss_here);
    if (!ok) {
      for (auto& t : miss_here) {
        t.s = s;
        missing.push_back(t);
      }
      continue;
    }
    Rational term = xi_val * Rational(ctx.hurwitz_at(delta).num12);
    if (s > 0) term = term * Rational(2);  // +-s
    sum12 = sum12 + term;
  }
  if (!missing.empty()) throw unresolved_xi_error(std::move(missing));

  // trace = mu(N)(p+1) - sum12 / 24
  Rational t = Rational(arith::mobius(N, table) * (p + 1)) - sum12 / Rational(24);
  if (!t.is_integer()) throw std::logic_error("tr_tp is not integral: transcription bug");
  return checked_cast_ll(t.num);
}

long long tr_w_tp(long long N, long long p, const TraceContext& ctx) {
  const arith::FactorTable& table = *ctx.factors;
  check_level_prime(N, p, table);

  i128 sum12 = 0;
  for (long long s = 0; s * s * N <= 4 * p; ++s) {
    i128 sn = checked_mul(static_cast<i128>(s), static_cast<i128>(N));
    i128 arg = checked_sub(checked_mul(sn, sn), checked_mul(static_cast<i128>(4) * N, static_cast<i128>(p)));
    i128 h = ctx.hurwitz_at(checked_cast_ll(arg)).num12;
    if (s > 0) h = checked_mul(h, 2);
    sum12 = checked_add(sum12, h);
  }
  // trace = sum12 / 24 - (p+1)
  i128 t24 = checked_sub(sum12, static_cast<i128>(24) * (p + 1));
  if (t24 % 24 != 0) throw std::logic_error("tr_w_tp is not integral: transcription bug");
  return checked_cast_ll(t24 / 24);
}

}  // namespace murmur::traces
