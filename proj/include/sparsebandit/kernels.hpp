#pragma once
// ===========================================================================
// Dense vector kernels: scalar reference implementations plus SIMD variants
// selected at runtime.  Everything downstream (covariance accumulation, Lasso
// coordinate descent, policy argmax loops, eigen iterations) funnels its inner
// loops through these three primitives.
//
// Backend selection: the first call probes the CPU (AVX2+FMA on x86-64) and
// installs function pointers.  Override with force_backend() or the
// SPARSE_BANDIT_KERNELS environment variable ("scalar" or "avx2").
// All backends agree to floating-point roundoff; the equivalence tests pin
// this down.  A given machine always picks the same backend, so reruns are
// bit-identical.
// ===========================================================================

#include <cstddef>

#if defined(__x86_64__) || defined(__i386__)
#define SPARSEBANDIT_X86 1
#endif

namespace sparsebandit::kernels {

enum class Backend { Scalar, Avx2 };

// Currently active backend (probes the CPU on first use).
Backend active_backend();
// Force a specific backend; throws if unsupported on this CPU.
void force_backend(Backend b);
// Re-probe CPU / environment (used by tests after force_backend).
void reset_backend();
const char* backend_name(Backend b);

// dot(x, y) = sum_i x[i]*y[i]
double dot(const double* x, const double* y, std::size_t n);
// axpy: y += a*x
void axpy(double a, const double* x, double* y, std::size_t n);
// sumsq(x) = sum_i x[i]^2
double sumsq(const double* x, std::size_t n);

// Scalar reference implementations, always available; the SIMD variants are
// equivalence-tested against these.
namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double sumsq(const double* x, std::size_t n);
}  // namespace scalar

}  // namespace sparsebandit::kernels
