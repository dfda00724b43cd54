#pragma once

#include "murmur/arith.hpp"
#include "murmur/quadforms.hpp"

namespace murmur::traces {

// Shared lookup state for trace evaluation.  The factor table must cover
// every level; the Hurwitz table is optional and per-argument coverage is
// checked on use, falling back to on-demand enumeration when absent.
struct TraceContext {
  const arith::FactorTable* factors = nullptr;
  const quadforms::HurwitzTable* hurwitz = nullptr;

  quadforms::Twelfths hurwitz_at(long long disc) const {
    if (hurwitz && hurwitz->covers(disc)) return hurwitz->at(disc);
    return quadforms::hurwitz(disc);
  }
};

long long genus_x0(long long N);

// dim of the new subspace of weight-2 cusp forms at squarefree level N,
// sieved from genera: sum over d | N of (-2)^omega(d) * genus_x0(N/d)
long long dim_new(long long N, const arith::FactorTable& table);

// trace of T_p on the new subspace, squarefree N coprime to p:
//   -(1/2) sum_{s^2 <= 4p} xi_{s^2-4p}(N) H(s^2-4p) + mu(N)(p+1)
// Unresolved xi branches surface as one error carrying every affected
// (s, delta, q); terms are never silently skipped.
long long tr_tp(long long N, long long p, const TraceContext& ctx, const arith::XiPolicy& policy);

// trace of the signed Fricke composite on the new subspace:
//   (1/2) sum_{s^2 N <= 4p} H(s^2 N^2 - 4Np) - (p+1)
long long tr_w_tp(long long N, long long p, const TraceContext& ctx);

}  // namespace murmur::traces
