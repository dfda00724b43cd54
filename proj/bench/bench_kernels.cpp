#include <omp.h>

#include <cstdio>
#include <cstdlib>

#include "murmur/arith.hpp"
#include "murmur/experiments.hpp"
#include "murmur/quadforms.hpp"
#include "murmur/traces.hpp"

// Times the OpenMP kernels against their serial references.  A scale
// factor (default 1) multiplies the problem sizes.
int main(int argc, char** argv) {
  long long scale = argc > 1 ? std::atoll(argv[1]) : 1;
  if (scale < 1) scale = 1;
  int max_threads = omp_get_max_threads();
  std::printf("threads available: %d\n", max_threads);

  using murmur::arith::FactorTable;
  using murmur::quadforms::HurwitzTable;

  {
    long long limit = 2'000'000 * scale;
    double t0 = omp_get_wtime();
    auto serial = HurwitzTable::build_serial(limit);
    double t1 = omp_get_wtime();
    auto parallel = HurwitzTable::build(limit);
    double t2 = omp_get_wtime();
    bool same = serial.num12 == parallel.num12;
    std::printf("hurwitz table %lld: serial %.3fs, parallel %.3fs (%.2fx)%s\n", limit, t1 - t0,
                t2 - t1, (t1 - t0) / (t2 - t1), same ? "" : "  MISMATCH");
    if (!same) return 1;
  }

  {
    long long x = 5'000'000 * scale;
    double t0 = omp_get_wtime();
    long long serial = murmur::arith::mertens_serial(x);
    double t1 = omp_get_wtime();
    long long blocked = murmur::arith::mertens(x);
    double t2 = omp_get_wtime();
    std::printf("mertens %lld: serial %.3fs, blocked %.3fs (%.2fx)%s\n", x, t1 - t0, t2 - t1,
                (t1 - t0) / (t2 - t1), serial == blocked ? "" : "  MISMATCH");
    if (serial != blocked) return 1;
  }

  {
    murmur::experiments::ExperimentConfig cfg;
    cfg.family = murmur::experiments::Family::MfDelta;
    cfg.x = 40 * scale;
    auto factors = FactorTable::build(2 * cfg.x + 1);
    auto hurwitz = HurwitzTable::build(32 * cfg.x * cfg.x + 1);
    murmur::traces::TraceContext ctx{&factors, &hurwitz};

    omp_set_num_threads(1);
    double t0 = omp_get_wtime();
    auto one = murmur::experiments::mf_delta_series(cfg, ctx);
    double t1 = omp_get_wtime();
    omp_set_num_threads(max_threads);
    auto many = murmur::experiments::mf_delta_series(cfg, ctx);
    double t2 = omp_get_wtime();
    bool same = one.points.size() == many.points.size();
    for (size_t i = 0; same && i < one.points.size(); ++i)
      same = one.points[i].value.exact_eq(many.points[i].value);
    std::printf("delta series X=%lld: 1 thread %.3fs, %d threads %.3fs (%.2fx)%s\n", cfg.x,
                t1 - t0, max_threads, t2 - t1, (t1 - t0) / (t2 - t1), same ? "" : "  MISMATCH");
    if (!same) return 1;
  }

  return 0;
}
