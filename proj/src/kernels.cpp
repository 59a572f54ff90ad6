#include "courtqg/kernels.hpp"

#include <atomic>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace courtqg::kernels {

namespace {

std::atomic<bool> g_parallel{true};

// Below these sizes the fork/join overhead dominates any possible gain.
constexpr size_t kGemmParallelFlops = 1u << 15;
constexpr size_t kMapParallelLen = 1u << 14;

bool use_parallel(size_t work) {
#ifdef _OPENMP
  return g_parallel.load(std::memory_order_relaxed) && work >= kGemmParallelFlops &&
         omp_get_max_threads() > 1;
#else
  (void)work;
  return false;
#endif
}

bool use_parallel_map(size_t n) {
#ifdef _OPENMP
  return g_parallel.load(std::memory_order_relaxed) && n >= kMapParallelLen &&
         omp_get_max_threads() > 1;
#else
  (void)n;
  return false;
#endif
}

// One output row of C. The p-loop is ascending in every variant; parallel
// callers split rows across threads, so each C element is written by exactly
// one thread with the same accumulation order as the serial path.
inline void gemm_row(bool trans_a, bool trans_b, size_t i, size_t n, size_t k, size_t m,
                     const double* a, const double* b, double* c_row, bool accumulate) {
  if (!accumulate) {
    for (size_t j = 0; j < n; ++j) c_row[j] = 0.0;
  }
  if (!trans_a && !trans_b) {
    const double* a_row = a + i * k;
    for (size_t p = 0; p < k; ++p) {
      const double a_ip = a_row[p];
      const double* b_row = b + p * n;
      for (size_t j = 0; j < n; ++j) c_row[j] += a_ip * b_row[j];
    }
  } else if (!trans_a && trans_b) {
    const double* a_row = a + i * k;
    for (size_t j = 0; j < n; ++j) {
      const double* b_row = b + j * k;
      double acc = 0.0;
      for (size_t p = 0; p < k; ++p) acc += a_row[p] * b_row[p];
      c_row[j] += acc;
    }
  } else if (trans_a && !trans_b) {
    // a stored k×m
    for (size_t p = 0; p < k; ++p) {
      const double a_ip = a[p * m + i];
      const double* b_row = b + p * n;
      for (size_t j = 0; j < n; ++j) c_row[j] += a_ip * b_row[j];
    }
  } else {
    // a stored k×m, b stored n×k
    for (size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (size_t p = 0; p < k; ++p) acc += a[p * m + i] * b[j * k + p];
      c_row[j] += acc;
    }
  }
}

}  // namespace

void set_parallel(bool enabled) { g_parallel.store(enabled, std::memory_order_relaxed); }
bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }

void gemm_serial(bool trans_a, bool trans_b, size_t m, size_t n, size_t k,
                 const double* a, const double* b, double* c, bool accumulate) {
  for (size_t i = 0; i < m; ++i)
    gemm_row(trans_a, trans_b, i, n, k, m, a, b, c + i * n, accumulate);
}

void gemm_parallel(bool trans_a, bool trans_b, size_t m, size_t n, size_t k,
                   const double* a, const double* b, double* c, bool accumulate) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(m); ++i)
    gemm_row(trans_a, trans_b, static_cast<size_t>(i), n, k, m, a, b,
             c + static_cast<size_t>(i) * n, accumulate);
#else
  gemm_serial(trans_a, trans_b, m, n, k, a, b, c, accumulate);
#endif
}

void gemm(bool trans_a, bool trans_b, size_t m, size_t n, size_t k,
          const double* a, const double* b, double* c, bool accumulate) {
  if (use_parallel(m * n * k))
    gemm_parallel(trans_a, trans_b, m, n, k, a, b, c, accumulate);
  else
    gemm_serial(trans_a, trans_b, m, n, k, a, b, c, accumulate);
}

double sigmoid_scalar(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

#define COURTQG_MAP_KERNEL(NAME, EXPR)                                     \
  void NAME##_serial(const double* x, double* y, size_t n) {               \
    for (size_t i = 0; i < n; ++i) y[i] = (EXPR);                          \
  }                                                                        \
  void NAME##_parallel(const double* x, double* y, size_t n) {             \
    _Pragma("omp parallel for schedule(static)")                           \
    for (long long i = 0; i < static_cast<long long>(n); ++i)              \
      y[i] = (EXPR);                                                       \
  }                                                                        \
  void NAME(const double* x, double* y, size_t n) {                        \
    if (use_parallel_map(n))                                               \
      NAME##_parallel(x, y, n);                                            \
    else                                                                   \
      NAME##_serial(x, y, n);                                              \
  }

COURTQG_MAP_KERNEL(map_sigmoid, sigmoid_scalar(x[i]))
COURTQG_MAP_KERNEL(map_tanh, std::tanh(x[i]))
#undef COURTQG_MAP_KERNEL

#define COURTQG_BIN_KERNEL(NAME, OP)                                           \
  void NAME##_serial(const double* a, const double* b, double* y, size_t n) {  \
    for (size_t i = 0; i < n; ++i) y[i] = a[i] OP b[i];                        \
  }                                                                            \
  void NAME##_parallel(const double* a, const double* b, double* y, size_t n) {\
    _Pragma("omp parallel for schedule(static)")                               \
    for (long long i = 0; i < static_cast<long long>(n); ++i)                  \
      y[i] = a[i] OP b[i];                                                     \
  }                                                                            \
  void NAME(const double* a, const double* b, double* y, size_t n) {           \
    if (use_parallel_map(n))                                                   \
      NAME##_parallel(a, b, y, n);                                             \
    else                                                                       \
      NAME##_serial(a, b, y, n);                                               \
  }

COURTQG_BIN_KERNEL(vadd, +)
COURTQG_BIN_KERNEL(vsub, -)
COURTQG_BIN_KERNEL(vmul, *)
#undef COURTQG_BIN_KERNEL

void axpy_serial(double alpha, const double* x, double* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void axpy_parallel(double alpha, const double* x, double* y, size_t n) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) y[i] += alpha * x[i];
#else
  axpy_serial(alpha, x, y, n);
#endif
}

void axpy(double alpha, const double* x, double* y, size_t n) {
  if (use_parallel_map(n))
    axpy_parallel(alpha, x, y, n);
  else
    axpy_serial(alpha, x, y, n);
}

}  // namespace courtqg::kernels
