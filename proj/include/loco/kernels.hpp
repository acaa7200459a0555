#pragma once

// Arithmetic inner loops shared by the count-distribution engine, the
// recurrent model and the optimizer. Every kernel has a portable scalar
// reference; an AVX2/FMA variant is selected at runtime when the CPU
// supports it. LOCO_SIMD=scalar|avx2|auto overrides the choice.
//
// Elementwise kernels (pbd_forward_step, axpy, ger, gemv_t, adam_update)
// avoid fused multiply-add so both variants round identically. Reductions
// (dot, gemv, the dp term of pbd_backward_step) use FMA and a different
// summation order in the vector variant and agree with the scalar reference
// only to within rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace loco::kernels {

struct AdamCoeffs {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double bias_correction1;  // 1 - beta1^step
  double bias_correction2;  // 1 - beta2^step
};

struct KernelTable {
  std::string_view name;

  // One time step of the count-distribution recursion over bins 0..n-1 where
  // bin n-1 is an absorbing tail:
  //   next[0]   = (1-p) prev[0]
  //   next[k]   = (1-p) prev[k] + p prev[k-1]      0 < k < n-1
  //   next[n-1] =       prev[n-1] + p prev[n-2]
  // Requires n >= 2.
  void (*pbd_forward_step)(const double* prev, double* next, std::size_t n, double p);

  // Adjoint of pbd_forward_step. Given dL/dnext, writes dL/dprev and returns
  // dL/dp.
  double (*pbd_backward_step)(const double* prev, const double* grad_next, double* grad_prev,
                              std::size_t n, double p);

  double (*dot)(const double* a, const double* b, std::size_t n);

  // y += W x, W is rows x cols row-major.
  void (*gemv)(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols);

  // x += W^T y.
  void (*gemv_t)(const double* w, const double* y, double* x, std::size_t rows, std::size_t cols);

  // G += y x^T.
  void (*ger)(double* g, const double* y, const double* x, std::size_t rows, std::size_t cols);

  // y += alpha x.
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  void (*adam_update)(double* param, const double* grad, double* m, double* v, std::size_t n,
                      const AdamCoeffs& c);
};

/// The scalar reference table. Always available.
const KernelTable& scalar();

/// The AVX2/FMA table, or nullptr when not compiled in or unsupported by
/// the running CPU.
const KernelTable* avx2();

/// Table chosen at first use from CPU features and LOCO_SIMD.
const KernelTable& active();

/// Force a table for the rest of the process (tests and benchmarks).
void set_active(const KernelTable& table);

}  // namespace loco::kernels
