#include "murmur/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <numeric>
#include <set>

#include "murmur/errors.hpp"

namespace murmur::experiments {

namespace {

long long isqrt_ll(long long n) {
  if (n < 0) return 0;
  auto r = static_cast<long long>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

// floor(q * x) for a positive rational scale
long long scale_floor(const Rational& q, long long x) {
  return checked_cast_ll(checked_mul(q.num, i128(x)) / q.den);
}

// Ordered parallel map: body(i) fills slot i, exceptions are rethrown in
// index order so failures are deterministic.
void parallel_over(std::size_t count, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < static_cast<long long>(count); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<long long> prime_axis(const ExperimentConfig& cfg) {
  return arith::primes_up_to(scale_floor(cfg.x_max_ratio, cfg.x));
}

struct LevelRow {
  long long n = 0;
  int mu = 0;
  long long dim = 0;
};

// squarefree levels in [X, beta X] with their newspace dimensions
std::vector<LevelRow> level_rows(const ExperimentConfig& cfg, const traces::TraceContext& ctx) {
  std::vector<LevelRow> rows;
  long long hi = scale_floor(cfg.beta, cfg.x);
  for (long long n = std::max<long long>(2, cfg.x); n <= hi; ++n) {
    if (!arith::is_squarefree(n, *ctx.factors)) continue;
    rows.push_back({n, arith::mobius(n, *ctx.factors), traces::dim_new(n, *ctx.factors)});
  }
  return rows;
}

void sort_points(std::vector<SeriesPoint>& pts) {
  std::sort(pts.begin(), pts.end(), [](const SeriesPoint& a, const SeriesPoint& b) {
    if (a.class_tag != b.class_tag) return a.class_tag < b.class_tag;
    return a.x < b.x;
  });
}

Series finish(Series s) {
  sort_points(s.points);
  if (s.config.smoothing_window > 0) return smooth(s, s.config.smoothing_window);
  return s;
}

// per-slot scratch for xi bookkeeping
struct XiStats {
  long long skipped_terms = 0;
  std::set<long long> skipped_levels;
};

void merge_xi_stats(SeriesDiagnostics& diag, const std::vector<XiStats>& stats) {
  std::set<long long> levels;
  for (const auto& st : stats) {
    diag.xi_skipped_terms += st.skipped_terms;
    levels.insert(st.skipped_levels.begin(), st.skipped_levels.end());
  }
  diag.excluded_levels.assign(levels.begin(), levels.end());
}

Rational quantize_dyadic(double v) {
  static const long long kScale = 1LL << 40;
  auto scaled = static_cast<long long>(std::llround(v * static_cast<double>(kScale)));
  return Rational(scaled, kScale);
}

Rational point_rational(const SeriesPoint& pt) {
  if (pt.value.is_rational()) return pt.value.as_rational();
  return quantize_dyadic(pt.value.to_double());
}

}  // namespace

void ExperimentConfig::validate() const {
  if (x < 2) throw domain_error("window base X must be at least 2");
  if (!(Rational(1) < beta)) throw domain_error("beta must exceed 1");
  if (x_max_ratio.num <= 0) throw domain_error("x-axis ratio must be positive");
  if (weight < 2 || weight % 2 != 0) throw domain_error("weight must be a positive even integer");
  if (smoothing_window < 0) throw domain_error("smoothing window must be nonnegative");
  if (class_sum_variant < 0 || class_sum_variant > 4)
    throw domain_error("class sum variant must be 0..4");
  if (mr_level_floor < 2) throw domain_error("level floor must be at least 2");
}

Series mf_delta_series(const ExperimentConfig& cfg, const traces::TraceContext& ctx) {
  cfg.validate();
  if (cfg.weight != 2) throw domain_error("trace-formula series require weight 2");
  auto primes = prime_axis(cfg);
  auto rows = level_rows(cfg, ctx);

  Series out;
  out.config = cfg;
  out.points.resize(primes.size());
  parallel_over(primes.size(), [&](std::size_t i) {
    long long p = primes[i];
    i128 num = 0;
    long long den = 0;
    for (const auto& row : rows) {
      if (cfg.coprimality && row.n % p == 0) continue;
      num = checked_add(num, i128(traces::tr_w_tp(row.n, p, ctx)));
      den += row.dim;
    }
    if (den == 0)
      throw domain_error("no levels with nonzero newspace dimension in range at p=" +
                         std::to_string(p));
    out.points[i] = {p, Rational(p, cfg.x), Value::rational(Rational(num, den)), "all"};
  });
  return finish(std::move(out));
}

namespace {

// Shared core for the no-root series and its mobius decomposition: per prime,
// accumulate sqrt(N)-weighted traces and mobius terms over the same level
// set.  Levels with unresolved xi terms are dropped from every sum for that
// prime, so the decomposition identity survives skips.
struct NoRootPoint {
  RootSum trace_num;
  RootSum mobius_num;  // sum' sqrt(N) mu(N), same included levels
  long long den = 0;
};

NoRootPoint no_root_point(long long p, const std::vector<LevelRow>& rows,
                          const ExperimentConfig& cfg, const traces::TraceContext& ctx,
                          XiStats& stats) {
  NoRootPoint pt;
  for (const auto& row : rows) {
    if (cfg.coprimality && row.n % p == 0) continue;
    long long tr = 0;
    try {
      tr = traces::tr_tp(row.n, p, ctx, cfg.xi_policy);
    } catch (const unresolved_xi_error& e) {
      stats.skipped_terms += static_cast<long long>(e.terms.size());
      stats.skipped_levels.insert(row.n);
      continue;
    }
    pt.trace_num.add_term(row.n, Rational(tr));
    pt.mobius_num.add_term(row.n, Rational(row.mu));
    pt.den += row.dim;
  }
  if (pt.den == 0)
    throw domain_error("no levels with nonzero newspace dimension in range at p=" +
                       std::to_string(p));
  return pt;
}

}  // namespace

Series mf_no_root_series(const ExperimentConfig& cfg, const traces::TraceContext& ctx) {
  cfg.validate();
  if (cfg.weight != 2) throw domain_error("trace-formula series require weight 2");
  auto primes = prime_axis(cfg);
  auto rows = level_rows(cfg, ctx);

  Series out;
  out.config = cfg;
  out.points.resize(primes.size());
  std::vector<XiStats> stats(primes.size());
  parallel_over(primes.size(), [&](std::size_t i) {
    long long p = primes[i];
    auto pt = no_root_point(p, rows, cfg, ctx, stats[i]);
    out.points[i] = {p, Rational(p, cfg.x), Value(pt.trace_num, RootSum(Rational(pt.den))),
                     "all"};
  });
  merge_xi_stats(out.diagnostics, stats);
  return finish(std::move(out));
}

MobiusParts mobius_part(const ExperimentConfig& cfg, const traces::TraceContext& ctx) {
  cfg.validate();
  if (cfg.weight != 2) throw domain_error("trace-formula series require weight 2");
  auto primes = prime_axis(cfg);
  auto rows = level_rows(cfg, ctx);

  MobiusParts parts;
  parts.mobius.config = cfg;
  parts.class_part.config = cfg;
  parts.approx.config = cfg;
  parts.mobius.points.resize(primes.size());
  parts.class_part.points.resize(primes.size());
  parts.approx.points.resize(primes.size());
  std::vector<XiStats> stats(primes.size());
  Rational x_sq_inv(1, checked_cast_ll(checked_mul(i128(cfg.x), i128(cfg.x))));

  parallel_over(primes.size(), [&](std::size_t i) {
    long long p = primes[i];
    auto pt = no_root_point(p, rows, cfg, ctx, stats[i]);
    RootSum den(Rational(pt.den));
    Value mob(pt.mobius_num.scaled(Rational(p + 1)), den);
    Value no_root(pt.trace_num, den);
    Rational scaled(p, cfg.x);

    // approx overlay has no trace content, so it ignores xi skips
    RootSum approx_num;
    for (const auto& row : rows) {
      if (cfg.coprimality && row.n % p == 0) continue;
      approx_num.add_term(row.n, Rational(row.mu));
    }
    parts.mobius.points[i] = {p, scaled, mob, "mobius"};
    parts.class_part.points[i] = {p, scaled, no_root - mob, "classnum"};
    parts.approx.points[i] = {p, scaled,
                              Value(approx_num.scaled(Rational(p) * x_sq_inv), RootSum(Rational(1))),
                              "mu-approx"};
  });
  merge_xi_stats(parts.mobius.diagnostics, stats);
  parts.class_part.diagnostics = parts.mobius.diagnostics;
  parts.mobius = finish(std::move(parts.mobius));
  parts.class_part = finish(std::move(parts.class_part));
  parts.approx = finish(std::move(parts.approx));
  return parts;
}

Rational fit_slope(const std::vector<std::pair<Rational, Rational>>& points) {
  if (points.size() < 2) throw domain_error("slope fit needs at least two points");
  Rational sx(0), sy(0), sxx(0), sxy(0);
  for (const auto& [x, y] : points) {
    sx = sx + x;
    sy = sy + y;
    sxx = sxx + x * x;
    sxy = sxy + x * y;
  }
  Rational n(static_cast<long long>(points.size()));
  Rational den = n * sxx - sx * sx;
  if (den.is_zero()) throw domain_error("slope fit is degenerate (all x equal)");
  return (n * sxy - sx * sy) / den;
}

Rational fit_slope(const Series& series, long long x_lo, long long x_hi) {
  std::vector<std::pair<Rational, Rational>> pts;
  for (const auto& pt : series.points) {
    if (pt.x < x_lo || pt.x > x_hi) continue;
    pts.emplace_back(Rational(pt.x), point_rational(pt));
  }
  return fit_slope(pts);
}

namespace {

struct DataView {
  // one entry per record in the level window
  struct Entry {
    long long level = 0;
    long long dim = 1;
    int root = 0;
    const ingest::NewformRecord* nf = nullptr;
    const ingest::CurveRecord* curve = nullptr;
  };
  std::vector<Entry> entries;
  int weight = 2;
};

// Records with level in [X, beta X]; newform datasets must carry one uniform
// weight inside the window.
DataView dataset_window(const ExperimentConfig& cfg, const ingest::Dataset& data) {
  DataView view;
  long long hi = scale_floor(cfg.beta, cfg.x);
  int weight = 0;
  if (data.kind == ingest::DataKind::Newforms) {
    for (const auto& nf : data.newforms) {
      if (nf.level < cfg.x || nf.level > hi) continue;
      if (weight == 0) weight = nf.weight;
      if (nf.weight != weight)
        throw validation_error("mixed weights in level window: " + std::to_string(weight) +
                               " and " + std::to_string(nf.weight));
      view.entries.push_back({nf.level, nf.orbit_dim, nf.global_root, &nf, nullptr});
    }
  } else {
    for (const auto& c : data.curves) {
      if (c.conductor < cfg.x || c.conductor > hi) continue;
      if (arith::factorize_trial(c.conductor).squarefree() == false) continue;
      view.entries.push_back({c.conductor, 1, c.global_root, nullptr, &c});
      weight = 2;
    }
  }
  view.weight = weight == 0 ? cfg.weight : weight;
  return view;
}

long long entry_ap(const DataView::Entry& e, const ingest::Dataset& data, long long p,
                   long long prime_idx) {
  if (e.nf != nullptr) return e.nf->ap_traces[static_cast<std::size_t>(prime_idx)];
  (void)data;
  return ingest::curve_ap(*e.curve, p);
}

// prime axis clipped to the dataset's tabulated range for newforms
std::vector<long long> data_axis(const ExperimentConfig& cfg, const ingest::Dataset& data,
                                 SeriesDiagnostics& diag) {
  auto primes = prime_axis(cfg);
  if (data.kind == ingest::DataKind::Newforms && !primes.empty() && primes.back() > data.pmax) {
    diag.axis_cap = data.pmax;
    while (!primes.empty() && primes.back() > data.pmax) primes.pop_back();
  }
  return primes;
}

// p^{1-k/2} as an exact rational scale (k even, k >= 2)
Rational weight_scale(long long p, int weight) {
  i128 denom = 1;
  for (int i = 0; i < weight / 2 - 1; ++i) denom = checked_mul(denom, i128(p));
  return Rational(1, checked_cast_ll(denom));
}

}  // namespace

Series data_fixed_root_series(const ExperimentConfig& cfg, const ingest::Dataset& data) {
  cfg.validate();
  Series out;
  out.config = cfg;
  auto view = dataset_window(cfg, data);
  auto primes = data_axis(cfg, data, out.diagnostics);

  bool has_plus = false, has_minus = false;
  for (const auto& e : view.entries) (e.root > 0 ? has_plus : has_minus) = true;
  if (!has_plus && !has_minus)
    throw domain_error("no dataset records with level in the configured window");
  if (!has_plus) out.diagnostics.empty_classes.push_back("+");
  if (!has_minus) out.diagnostics.empty_classes.push_back("-");

  std::vector<std::vector<SeriesPoint>> slots(primes.size());
  parallel_over(primes.size(), [&](std::size_t i) {
    long long p = primes[i];
    long long idx = data.kind == ingest::DataKind::Newforms ? data.prime_index(p) : -1;
    i128 num[2] = {0, 0};
    long long den[2] = {0, 0};
    for (const auto& e : view.entries) {
      if (cfg.coprimality && e.level % p == 0) continue;
      int side = e.root > 0 ? 0 : 1;
      num[side] = checked_add(num[side], i128(entry_ap(e, data, p, idx)));
      den[side] += e.dim;
    }
    Rational scale = weight_scale(p, view.weight);
    for (int side = 0; side < 2; ++side) {
      if (den[side] == 0) continue;
      slots[i].push_back({p, Rational(p, cfg.x),
                          Value::rational(Rational(num[side], den[side]) * scale),
                          side == 0 ? "+" : "-"});
    }
  });
  for (auto& s : slots)
    for (auto& pt : s) out.points.push_back(std::move(pt));
  return finish(std::move(out));
}

Series data_no_root_series(const ExperimentConfig& cfg, const ingest::Dataset& data) {
  cfg.validate();
  Series out;
  out.config = cfg;
  auto view = dataset_window(cfg, data);
  auto primes = data_axis(cfg, data, out.diagnostics);
  if (view.entries.empty())
    throw domain_error("no dataset records with level in the configured window");

  out.points.resize(primes.size());
  parallel_over(primes.size(), [&](std::size_t i) {
    long long p = primes[i];
    long long idx = data.kind == ingest::DataKind::Newforms ? data.prime_index(p) : -1;
    RootSum num;
    long long den = 0;
    for (const auto& e : view.entries) {
      if (cfg.coprimality && e.level % p == 0) continue;
      num = num + RootSum::sqrt_of(e.level, Rational(entry_ap(e, data, p, idx)));
      den += e.dim;
    }
    if (den == 0) throw domain_error("all records excluded at p=" + std::to_string(p));
    Value v(num.scaled(weight_scale(p, view.weight)), RootSum(Rational(den)));
    out.points[i] = {p, Rational(p, cfg.x), v, "all"};
  });
  return finish(std::move(out));
}

Series al_eigenspace_series(const ExperimentConfig& cfg, const ingest::Dataset& data) {
  cfg.validate();
  if (data.kind != ingest::DataKind::Newforms)
    throw validation_error("eigenspace averages need a newform dataset");

  // fixed-p mode windows the cofactor prime q, otherwise the product pq
  long long hi = scale_floor(cfg.beta, cfg.x);
  struct TaggedRecord {
    const ingest::NewformRecord* nf;
    std::string tag;
  };
  std::vector<TaggedRecord> recs;
  int weight = 0;
  for (const auto& nf : data.newforms) {
    if (cfg.al_fixed_p > 0) {
      if (nf.level % cfg.al_fixed_p != 0) continue;
      long long q = nf.level / cfg.al_fixed_p;
      if (q < cfg.x || q > hi) continue;
    } else {
      if (nf.level < cfg.x || nf.level > hi) continue;
    }
    auto fac = arith::factorize_trial(nf.level);
    if (fac.omega() != 2 || !fac.squarefree())
      throw validation_error("level " + std::to_string(nf.level) + " (orbit " + nf.orbit_label +
                             ") is not a product of two distinct primes");
    if (weight == 0) weight = nf.weight;
    if (nf.weight != weight)
      throw validation_error("mixed weights in level window: " + std::to_string(weight) +
                             " and " + std::to_string(nf.weight));
    // sign characters list the smaller level prime first; local sign = -lambda
    std::string tag;
    tag += nf.al_at(fac.factors[0].p) == -1 ? '+' : '-';
    tag += nf.al_at(fac.factors[1].p) == -1 ? '+' : '-';
    recs.push_back({&nf, tag});
  }
  if (recs.empty()) throw domain_error("no dataset records with level in the configured window");

  Series out;
  out.config = cfg;
  auto primes = data_axis(cfg, data, out.diagnostics);

  static const char* kTags[4] = {"++", "+-", "-+", "--"};
  std::set<std::string> seen;
  for (const auto& r : recs) seen.insert(r.tag);
  for (const auto* tag : kTags)
    if (seen.count(tag) == 0) out.diagnostics.empty_classes.push_back(tag);

  std::vector<std::vector<SeriesPoint>> slots(primes.size());
  parallel_over(primes.size(), [&](std::size_t i) {
    long long ell = primes[i];
    long long idx = data.prime_index(ell);
    std::map<std::string, std::pair<i128, long long>> acc;
    for (const auto& r : recs) {
      if (cfg.coprimality && r.nf->level % ell == 0) continue;
      auto& [num, den] = acc[r.tag];
      num = checked_add(num, i128(r.nf->ap_traces[static_cast<std::size_t>(idx)]));
      den += r.nf->orbit_dim;
    }
    Rational scale = weight_scale(ell, weight);
    for (const auto& [tag, nd] : acc) {
      if (nd.second == 0) continue;
      slots[i].push_back({ell, Rational(ell, cfg.x),
                          Value::rational(Rational(nd.first, nd.second) * scale), tag});
    }
  });
  for (auto& s : slots)
    for (auto& pt : s) out.points.push_back(std::move(pt));
  return finish(std::move(out));
}

Series class_sum_series(const ExperimentConfig& cfg, const traces::TraceContext& ctx) {
  cfg.validate();
  auto primes = prime_axis(cfg);
  auto rows = level_rows(cfg, ctx);
  if (rows.empty()) throw domain_error("no squarefree levels in the configured window");
  int variant = cfg.class_sum_variant;
  long long t_max = isqrt_ll(cfg.x);
  std::string tag = "a" + std::to_string(variant);

  Series out;
  out.config = cfg;
  out.points.resize(primes.size());
  parallel_over(primes.size(), [&](std::size_t i) {
    long long p = primes[i];
    i128 sum12 = 0;
    i128 den_linear = 0;   // sum' N        (variants 0..2)
    RootSum den_32;        // sum' N^{3/2}  (variants 3, 4)
    auto add_h = [&](i128 arg) {
      if (arg > 0) return;
      sum12 = checked_add(sum12, i128(ctx.hurwitz_at(checked_cast_ll(arg)).num12));
    };
    for (const auto& row : rows) {
      if (cfg.coprimality && row.n % p == 0) continue;
      i128 n = row.n;
      i128 np4 = checked_mul(i128(4) * n, i128(p));
      switch (variant) {
        case 0:
          for (long long s = 0; s <= 1; ++s)
            add_h(checked_sub(checked_mul(i128(s * s), checked_mul(n, n)), np4));
          break;
        case 1:
          for (long long s = 0; s <= 4; ++s)
            add_h(checked_sub(checked_mul(i128(s * s), checked_mul(i128(p), i128(p))), np4));
          break;
        case 2:
          for (long long s = 0; s <= 4; ++s)
            add_h(checked_sub(i128(s * s + 1), checked_mul(i128(3) * n, i128(p))));
          break;
        case 3:
          for (long long s = 0; s <= 1; ++s)
            add_h(checked_sub(checked_mul(i128(s), checked_mul(n, checked_mul(n, n))),
                              checked_mul(np4, n)));
          break;
        default:
          for (long long s = 0; s <= 1; ++s)
            for (long long t = 1; t <= t_max; ++t)
              add_h(checked_sub(
                  checked_sub(checked_mul(i128(s * s), checked_mul(n, checked_mul(n, n))),
                              checked_mul(i128(t), n)),
                  checked_mul(np4, n)));
          break;
      }
      if (variant <= 2) {
        den_linear = checked_add(den_linear, n);
      } else {
        den_32.add_term(row.n, Rational(row.n));
      }
    }
    Rational num(sum12, 12);
    Value v;
    if (variant <= 2) {
      if (den_linear == 0) throw domain_error("empty level sum at p=" + std::to_string(p));
      v = Value::rational(num / Rational(den_linear));
    } else {
      if (den_32.is_zero()) throw domain_error("empty level sum at p=" + std::to_string(p));
      if (variant == 4) den_32 = den_32.scaled(Rational(t_max));
      v = Value(RootSum(num), den_32);
    }
    out.points[i] = {p, Rational(p, cfg.x), v, tag};
  });
  return finish(std::move(out));
}

Rational lambda_mr(long long N, long long D, long long n, const arith::FactorTable& table) {
  if (D < 3 || D % 4 != 3 || !arith::is_fundamental_neg(D))
    throw domain_error("-D must be a fundamental discriminant with D = 3 mod 4");
  if (n < 1) throw domain_error("index n must be positive");
  if (N < 2 || !arith::factorize_trial(N).is_prime())
    throw domain_error("level must be prime");
  if (arith::kronecker(-D, N) != -1)
    throw domain_error("level " + std::to_string(N) + " is split or ramified in Q(sqrt(-" +
                       std::to_string(D) + "))");
  if (n % N == 0)
    throw domain_error("index shares a factor with the level");

  auto [h, u] = quadforms::class_number_fund(D);
  Rational total(checked_mul(checked_mul(i128(12) * h, i128(h)), i128(arith::sigma_coprime(n, N))),
                 i128(N - 1));
  i128 nD = checked_mul(i128(n), i128(D));
  total = total + Rational(checked_mul(i128(u) * h, i128(arith::ideal_count(checked_cast_ll(nD), D, table))));
  i128 phi_sum = 0;
  long long m_max = checked_cast_ll(nD / N);
  for (long long m = 1; m <= m_max; ++m) {
    long long rem = checked_cast_ll(checked_sub(nD, checked_mul(i128(m), i128(N))));
    i128 term = checked_mul(i128(arith::divisor_count(std::gcd(m, D))),
                            checked_mul(i128(arith::ideal_count(m, D, table)),
                                        i128(arith::ideal_count(rem, D, table))));
    phi_sum = checked_add(phi_sum, term);
  }
  total = total + Rational(checked_mul(i128(u) * u, phi_sum));
  return total;
}

Series lvalue_series(const ExperimentConfig& cfg, const arith::FactorTable& table) {
  cfg.validate();
  long long hi = scale_floor(cfg.beta, cfg.x);
  std::vector<long long> levels;
  for (long long n : arith::primes_up_to(hi))
    if (n >= std::max(cfg.x, cfg.mr_level_floor)) levels.push_back(n);
  if (levels.empty()) throw domain_error("no prime levels in the configured window");

  Series out;
  out.config = cfg;

  if (cfg.family == Family::LValueOverD) {
    std::vector<long long> axis;
    for (long long d : arith::primes_up_to(cfg.x))
      if (d > 3 && d % 4 == 3) axis.push_back(d);
    out.points.resize(axis.size());
    parallel_over(axis.size(), [&](std::size_t i) {
      long long D = axis[i];
      Rational sum(0);
      long long count = 0;
      for (long long N : levels) {
        if (arith::kronecker(-D, N) != -1) continue;
        sum = sum + lambda_mr(N, D, 1, table);
        ++count;
      }
      if (count == 0)
        throw domain_error("no inert levels in range for D=" + std::to_string(D));
      // tag by -D mod 8: D = 7 mod 8 gives 1, D = 3 mod 8 gives 5
      out.points[i] = {D, Rational(D, cfg.x), Value::rational(sum / Rational(count)),
                       D % 8 == 7 ? "1mod8" : "5mod8"};
    });
  } else if (cfg.family == Family::LValueOverP) {
    std::vector<long long> inert;
    for (long long N : levels)
      if (N % 3 == 2) inert.push_back(N);
    if (inert.empty()) throw domain_error("no inert prime levels in the configured window");
    std::vector<long long> axis;
    for (long long p : arith::primes_up_to(cfg.x))
      if (p != 3) axis.push_back(p);
    out.points.resize(axis.size());
    parallel_over(axis.size(), [&](std::size_t i) {
      long long p = axis[i];
      Rational sum(0);
      long long count = 0;
      for (long long N : inert) {
        if (N == p) continue;
        sum = sum + lambda_mr(N, 3, p, table);
        ++count;
      }
      if (count == 0)
        throw domain_error("no inert levels in range at p=" + std::to_string(p));
      out.points[i] = {p, Rational(p, cfg.x), Value::rational(sum / Rational(count)),
                       arith::kronecker(-3, p) == 1 ? "chi+1" : "chi-1"};
    });
  } else {
    throw domain_error("lvalue_series requires an L-value family");
  }
  return finish(std::move(out));
}

Series bqf_series(const ExperimentConfig& cfg, const arith::FactorTable& table) {
  cfg.validate();
  (void)table;
  auto primes = prime_axis(cfg);
  long long hi = scale_floor(cfg.beta, cfg.x);
  std::vector<long long> discs;
  for (long long d = cfg.x; d <= hi; ++d)
    if (arith::classify_discriminant(d) == cfg.bqf_class) discs.push_back(d);
  std::string tag = arith::discriminant_class_tag(cfg.bqf_class);

  Series out;
  out.config = cfg;
  out.points.resize(primes.size());
  parallel_over(primes.size(), [&](std::size_t i) {
    long long p = primes[i];
    long long sum = 0;
    for (long long d : discs) {
      if (d % p == 0) continue;
      sum += arith::kronecker(-d, p);
    }
    out.points[i] = {p, Rational(p, cfg.x), Value(RootSum(Rational(sum)), RootSum::sqrt_of(cfg.x)),
                     tag};
  });
  return finish(std::move(out));
}

long long representation_count(long long D, long long n, const arith::FactorTable& table) {
  if (!arith::is_fundamental_neg(D)) throw domain_error("-D must be a fundamental discriminant");
  if (n < 1) throw domain_error("n must be positive");
  long long u = D == 3 ? 3 : (D == 4 ? 2 : 1);
  auto fac = arith::factorize(n, table);
  std::vector<long long> divisors{1};
  for (const auto& pp : fac.factors) {
    std::size_t base = divisors.size();
    long long q = 1;
    for (int e = 1; e <= pp.e; ++e) {
      q = checked_cast_ll(checked_mul(i128(q), i128(pp.p)));
      for (std::size_t j = 0; j < base; ++j) divisors.push_back(divisors[j] * q);
    }
  }
  long long chi_sum = 0;
  for (long long d : divisors) chi_sum += arith::kronecker(-D, d);
  return 2 * u * chi_sum;
}

Series smooth(const Series& series, int window) {
  Series out;
  out.config = series.config;
  out.diagnostics = series.diagnostics;
  if (window <= 0) {
    out.points = series.points;
    return out;
  }
  // class segments are contiguous in the sorted point order
  std::size_t n = series.points.size();
  out.points.reserve(n);
  std::size_t seg_begin = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (series.points[i].class_tag != series.points[seg_begin].class_tag) seg_begin = i;
    std::size_t seg_end = i;
    while (seg_end + 1 < n && series.points[seg_end + 1].class_tag == series.points[i].class_tag)
      ++seg_end;
    std::size_t lo = std::max(seg_begin + window <= i ? i - window : seg_begin, seg_begin);
    std::size_t hi = std::min(i + static_cast<std::size_t>(window), seg_end);
    SeriesPoint pt = series.points[i];
    try {
      Value acc = series.points[lo].value;
      for (std::size_t j = lo + 1; j <= hi; ++j) acc = acc + series.points[j].value;
      pt.value = acc.scaled(Rational(1, static_cast<long long>(hi - lo + 1)));
    } catch (const resource_error&) {
      long double acc = 0.0L;
      for (std::size_t j = lo; j <= hi; ++j)
        acc += static_cast<long double>(series.points[j].value.to_double());
      pt.value = Value::rational(quantize_dyadic(
          static_cast<double>(acc / static_cast<long double>(hi - lo + 1))));
      ++out.diagnostics.fp_fallback_points;
    }
    out.points.push_back(std::move(pt));
  }
  return out;
}

}  // namespace murmur::experiments
