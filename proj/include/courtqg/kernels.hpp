#ifndef COURTQG_KERNELS_HPP
#define COURTQG_KERNELS_HPP

#include <cstddef>

// Dense numeric kernels. Every kernel has a serial reference implementation
// and an OpenMP variant that partitions output elements across threads while
// keeping the per-element accumulation order identical, so the two paths
// produce bit-identical results. The unprefixed entry points dispatch on
// problem size and the global parallel switch.
namespace courtqg::kernels {

// Global switch for the OpenMP paths (on by default when compiled with
// OpenMP). Serial fallback is always available.
void set_parallel(bool enabled);
bool parallel_enabled();

// C (m×n) = op(A)·op(B), optionally accumulating into C.
// Row-major. op(A) is A (m×k, trans_a=false) or the transpose of the stored
// k×m buffer (trans_a=true); same convention for B (k×n logical).
void gemm(bool trans_a, bool trans_b, size_t m, size_t n, size_t k,
          const double* a, const double* b, double* c, bool accumulate);
void gemm_serial(bool trans_a, bool trans_b, size_t m, size_t n, size_t k,
                 const double* a, const double* b, double* c, bool accumulate);
void gemm_parallel(bool trans_a, bool trans_b, size_t m, size_t n, size_t k,
                   const double* a, const double* b, double* c, bool accumulate);

// Elementwise maps y[i] = f(x[i]).
void map_sigmoid(const double* x, double* y, size_t n);
void map_sigmoid_serial(const double* x, double* y, size_t n);
void map_sigmoid_parallel(const double* x, double* y, size_t n);
void map_tanh(const double* x, double* y, size_t n);
void map_tanh_serial(const double* x, double* y, size_t n);
void map_tanh_parallel(const double* x, double* y, size_t n);

// Elementwise binaries y[i] = a[i] (op) b[i].
void vadd(const double* a, const double* b, double* y, size_t n);
void vadd_serial(const double* a, const double* b, double* y, size_t n);
void vadd_parallel(const double* a, const double* b, double* y, size_t n);
void vsub(const double* a, const double* b, double* y, size_t n);
void vsub_serial(const double* a, const double* b, double* y, size_t n);
void vsub_parallel(const double* a, const double* b, double* y, size_t n);
void vmul(const double* a, const double* b, double* y, size_t n);
void vmul_serial(const double* a, const double* b, double* y, size_t n);
void vmul_parallel(const double* a, const double* b, double* y, size_t n);

// y[i] += alpha * x[i] (backward accumulation workhorse).
void axpy(double alpha, const double* x, double* y, size_t n);
void axpy_serial(double alpha, const double* x, double* y, size_t n);
void axpy_parallel(double alpha, const double* x, double* y, size_t n);

// Numerically stable logistic for scalars; shared by kernels and tensor ops.
double sigmoid_scalar(double x);

}  // namespace courtqg::kernels

#endif  // COURTQG_KERNELS_HPP
