// Benchmarks the OpenMP kernels against the serial reference and verifies
// that both paths produce bit-identical results.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "courtqg/common.hpp"
#include "courtqg/kernels.hpp"

using namespace courtqg;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = Clock::now();
    fn();
    best = std::min(best, seconds_since(t0));
  }
  return best;
}

void bench_gemm(size_t n) {
  Rng rng(n);
  std::vector<double> a(n * n), b(n * n), cs(n * n), cp(n * n);
  for (auto& v : a) v = rng.uniform(-1.0, 1.0);
  for (auto& v : b) v = rng.uniform(-1.0, 1.0);

  const double flops = 2.0 * n * n * n;
  const double ts = time_best_of(3, [&] {
    kernels::gemm_serial(false, false, n, n, n, a.data(), b.data(), cs.data(), false);
  });
  const double tp = time_best_of(3, [&] {
    kernels::gemm_parallel(false, false, n, n, n, a.data(), b.data(), cp.data(), false);
  });

  double max_diff = 0.0;
  for (size_t i = 0; i < cs.size(); ++i) max_diff = std::max(max_diff, std::fabs(cs[i] - cp[i]));

  std::printf("gemm  %5zu  %9.2f ms  %9.2f ms  %6.2fx  %8.2f GF/s  max|diff|=%g\n", n,
              1e3 * ts, 1e3 * tp, ts / tp, flops / tp / 1e9, max_diff);
}

void bench_map(size_t n) {
  Rng rng(n);
  std::vector<double> x(n), ys(n), yp(n);
  for (auto& v : x) v = rng.uniform(-3.0, 3.0);

  const double ts = time_best_of(5, [&] { kernels::map_tanh_serial(x.data(), ys.data(), n); });
  const double tp = time_best_of(5, [&] { kernels::map_tanh_parallel(x.data(), yp.data(), n); });

  double max_diff = 0.0;
  for (size_t i = 0; i < n; ++i) max_diff = std::max(max_diff, std::fabs(ys[i] - yp[i]));

  std::printf("tanh  %5zu k %7.2f ms  %9.2f ms  %6.2fx  %8.2f Melem/s  max|diff|=%g\n", n / 1000,
              1e3 * ts, 1e3 * tp, ts / tp, n / tp / 1e6, max_diff);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; parallel variants fall back to serial\n");
#endif
  std::printf("%-5s %6s %12s %12s %8s\n", "kernel", "size", "serial", "parallel", "speedup");
  for (size_t n : {64, 128, 256, 384}) bench_gemm(n);
  for (size_t n : {100000, 1000000, 4000000}) bench_map(n);
  return 0;
}
