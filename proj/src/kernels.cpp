#include "sparsebandit/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

#if defined(SPARSEBANDIT_X86)
#include <immintrin.h>
#endif

namespace sparsebandit::kernels {

// ---------------------------------------------------------------------------
// Scalar reference kernels
// ---------------------------------------------------------------------------
namespace scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double sumsq(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

}  // namespace scalar

// ---------------------------------------------------------------------------
// AVX2 + FMA kernels (x86-64).  Compiled with per-function target attributes
// so the rest of the translation unit stays baseline; only executed after a
// successful CPUID probe.
// ---------------------------------------------------------------------------
#if defined(SPARSEBANDIT_X86)
namespace avx2 {

__attribute__((target("avx2,fma"))) double dot(const double* x, const double* y,
                                               std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  acc0 = _mm256_add_pd(acc0, acc1);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc0);
  double acc = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

__attribute__((target("avx2,fma"))) void axpy(double a, const double* x, double* y,
                                              std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i + 4, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4),
                                                _mm256_loadu_pd(y + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

__attribute__((target("avx2,fma"))) double sumsq(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d v0 = _mm256_loadu_pd(x + i);
    const __m256d v1 = _mm256_loadu_pd(x + i + 4);
    acc0 = _mm256_fmadd_pd(v0, v0, acc0);
    acc1 = _mm256_fmadd_pd(v1, v1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d v0 = _mm256_loadu_pd(x + i);
    acc0 = _mm256_fmadd_pd(v0, v0, acc0);
  }
  acc0 = _mm256_add_pd(acc0, acc1);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc0);
  double acc = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

}  // namespace avx2
#endif  // SPARSEBANDIT_X86

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------
namespace {

using DotFn = double (*)(const double*, const double*, std::size_t);
using AxpyFn = void (*)(double, const double*, double*, std::size_t);
using SumsqFn = double (*)(const double*, std::size_t);

struct Dispatch {
  Backend backend;
  DotFn dot;
  AxpyFn axpy;
  SumsqFn sumsq;
};

bool avx2_supported() {
#if defined(SPARSEBANDIT_X86)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Dispatch make_dispatch(Backend b) {
#if defined(SPARSEBANDIT_X86)
  if (b == Backend::Avx2) return {Backend::Avx2, avx2::dot, avx2::axpy, avx2::sumsq};
#endif
  return {Backend::Scalar, scalar::dot, scalar::axpy, scalar::sumsq};
}

Backend probe_backend() {
  if (const char* env = std::getenv("SPARSE_BANDIT_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
    if (std::strcmp(env, "avx2") == 0) {
      if (!avx2_supported())
        throw std::runtime_error("SPARSE_BANDIT_KERNELS=avx2 but CPU lacks AVX2/FMA");
      return Backend::Avx2;
    }
    throw std::runtime_error(std::string("unknown SPARSE_BANDIT_KERNELS value: ") + env);
  }
  return avx2_supported() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<const Dispatch*> g_dispatch{nullptr};

const Dispatch* current() {
  const Dispatch* d = g_dispatch.load(std::memory_order_acquire);
  if (d == nullptr) {
    static Dispatch storage = make_dispatch(probe_backend());
    const Dispatch* expected = nullptr;
    g_dispatch.compare_exchange_strong(expected, &storage, std::memory_order_acq_rel);
    d = g_dispatch.load(std::memory_order_acquire);
  }
  return d;
}

}  // namespace

Backend active_backend() { return current()->backend; }

void force_backend(Backend b) {
  if (b == Backend::Avx2 && !avx2_supported())
    throw std::runtime_error("force_backend: CPU lacks AVX2/FMA");
  static Dispatch forced;
  forced = make_dispatch(b);
  g_dispatch.store(&forced, std::memory_order_release);
}

void reset_backend() {
  static Dispatch probed;
  probed = make_dispatch(probe_backend());
  g_dispatch.store(&probed, std::memory_order_release);
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
  }
  return "?";
}

double dot(const double* x, const double* y, std::size_t n) {
  return current()->dot(x, y, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  current()->axpy(a, x, y, n);
}

double sumsq(const double* x, std::size_t n) { return current()->sumsq(x, n); }

}  // namespace sparsebandit::kernels
