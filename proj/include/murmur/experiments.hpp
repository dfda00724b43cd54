#pragma once

#include <string>
#include <utility>
#include <vector>

#include "murmur/arith.hpp"
#include "murmur/ingest.hpp"
#include "murmur/traces.hpp"
#include "murmur/value.hpp"

namespace murmur::experiments {

enum class Family {
  MfDelta,
  MfNoRoot,
  MfMobiusPart,
  MfFixedRootData,
  EcFixedRootData,
  EcNoRootData,
  AlEigenspace,
  ClassSum,
  LValueOverD,
  LValueOverP,
  Bqf,
};

struct ExperimentConfig {
  Family family = Family::MfDelta;
  long long x = 0;                  // window base X
  Rational beta{2};                 // level/discriminant window [X, beta*X]
  Rational x_max_ratio{4};          // prime axis up to ratio*X
  int weight = 2;
  bool coprimality = true;          // drop levels sharing a factor with the axis prime
  int smoothing_window = 0;
  arith::XiPolicy xi_policy;        // strict by default
  int class_sum_variant = 0;        // 0..4
  arith::DiscriminantClass bqf_class = arith::DiscriminantClass::Odd1Mod8;
  long long al_fixed_p = 0;         // 0 = both level primes vary
  long long mr_level_floor = 11;    // smallest level admitted in L-value averages

  void validate() const;
};

struct SeriesPoint {
  long long x = 0;          // prime p, or discriminant D
  Rational x_scaled;        // x / X
  Value value;
  std::string class_tag;
};

struct SeriesDiagnostics {
  long long xi_skipped_terms = 0;           // unresolved xi terms hit under strict policy
  std::vector<long long> excluded_levels;   // levels dropped because of unresolved xi
  std::vector<std::string> empty_classes;   // tags with no contributing records
  long long fp_fallback_points = 0;         // smoothed points that fell back to floating point
  long long axis_cap = 0;                   // axis truncated to this bound (0 = untruncated)
};

struct Series {
  ExperimentConfig config;
  std::vector<SeriesPoint> points;  // sorted by (class_tag, x)
  SeriesDiagnostics diagnostics;
};

struct MobiusParts {
  Series mobius;      // (p+1) * sum' sqrt(N) mu(N) / sum' dim_new
  Series class_part;  // no-root series minus the mobius series, exactly
  Series approx;      // (p/X^2) * sum' sqrt(N) mu(N)
};

// Averaged w-weighted traces: sum' tr_w_tp(N,p) / sum' dim_new(N) over
// squarefree N in [X, beta X] coprime to p.
Series mf_delta_series(const ExperimentConfig& cfg, const traces::TraceContext& ctx);

// sqrt(N)-weighted trace averages: sum' sqrt(N) tr_tp(N,p) / sum' dim_new(N).
// Under the strict xi policy a level whose trace hits an unresolved branch is
// excluded from both sums for that p and reported in the diagnostics.
Series mf_no_root_series(const ExperimentConfig& cfg, const traces::TraceContext& ctx);

// Decomposition of the no-root series into the mu(N)(p+1) part and the class
// number part; mobius + class_part reproduces mf_no_root_series exactly.
MobiusParts mobius_part(const ExperimentConfig& cfg, const traces::TraceContext& ctx);

// Exact least-squares slope of y against x.  Fewer than two points is a
// domain error.
Rational fit_slope(const std::vector<std::pair<Rational, Rational>>& points);

// fit_slope over the series points with x in [x_lo, x_hi]; irrational values
// are quantized to the nearest 2^-40 before fitting.
Rational fit_slope(const Series& series, long long x_lo, long long x_hi);

// Per-root-sign averages p^{1-k/2} sum a_p / count over dataset records with
// level in the window ("+" and "-" tags).  Curve datasets use point counts.
Series data_fixed_root_series(const ExperimentConfig& cfg, const ingest::Dataset& data);

// sqrt(N)-weighted dataset average without root split (single "all" tag).
Series data_no_root_series(const ExperimentConfig& cfg, const ingest::Dataset& data);

// Atkin-Lehner eigenspace averages over levels N = pq: one sub-series per
// local sign pattern ++, +-, -+, -- where the sign at q is -lambda_q.
Series al_eigenspace_series(const ExperimentConfig& cfg, const ingest::Dataset& data);

// Hurwitz class number averages, variants 0..4 of the argument family.
Series class_sum_series(const ExperimentConfig& cfg, const traces::TraceContext& ctx);

// Normalized average L-value: (sqrt(D) u^2 / 2pi) Lambda(N,2,D,n) as an exact
// rational, via 12h^2 sigma_N(n)/(N-1) + u r(nD) h + u^2 sum_m Phi(m,N).
Rational lambda_mr(long long N, long long D, long long n, const arith::FactorTable& table);

// L-value averages over levels: family LValueOverD (D on the axis, D prime,
// 3 < D <= X, tags 1mod8/5mod8) or LValueOverP (D = 3, primes p <= X, p != 3,
// tags chi+1/chi-1).
Series lvalue_series(const ExperimentConfig& cfg, const arith::FactorTable& table);

// (1/sqrt(X)) sum of kronecker(-D, p) over discriminants D in [X, beta X] of
// the configured class with gcd(D, p) = 1.
Series bqf_series(const ExperimentConfig& cfg, const arith::FactorTable& table);

// Number of representations of n by positive definite reduced forms of
// discriminant -D: 2 u_D sum_{d | n} kronecker(-D, d).
long long representation_count(long long D, long long n, const arith::FactorTable& table);

// Boundary-truncated moving average of width 2*window+1 within each class.
// Points whose exact mean overflows 128-bit arithmetic fall back to floating
// point and are counted in the diagnostics.
Series smooth(const Series& series, int window);

}  // namespace murmur::experiments
