// AVX2+FMA float kernels. This file is compiled with -mavx2 -mfma and must
// only be entered after avx2::supported() returned true.

#include "rtnet/substrate/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define RTNET_HAVE_AVX2 1
#endif

namespace rtnet::kernels::avx2 {

#ifdef RTNET_HAVE_AVX2

namespace {

inline float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 shuf = _mm_movehdup_ps(lo);
  __m128 sums = _mm_add_ps(lo, shuf);
  shuf = _mm_movehl_ps(shuf, sums);
  sums = _mm_add_ss(sums, shuf);
  return _mm_cvtss_f32(sums);
}

inline float dot_impl(const float* a, const float* b, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
  }
  float sum = hsum(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

inline void axpy_impl(float alpha, const float* x, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

bool supported() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

void gemv_acc(const float* a, std::size_t rows, std::size_t cols, const float* x, float* y) {
  std::size_t r = 0;
  // Four rows at a time share the loads of x.
  for (; r + 4 <= rows; r += 4) {
    const float* r0 = a + r * cols;
    const float* r1 = r0 + cols;
    const float* r2 = r1 + cols;
    const float* r3 = r2 + cols;
    __m256 s0 = _mm256_setzero_ps(), s1 = _mm256_setzero_ps();
    __m256 s2 = _mm256_setzero_ps(), s3 = _mm256_setzero_ps();
    std::size_t c = 0;
    for (; c + 8 <= cols; c += 8) {
      const __m256 vx = _mm256_loadu_ps(x + c);
      s0 = _mm256_fmadd_ps(_mm256_loadu_ps(r0 + c), vx, s0);
      s1 = _mm256_fmadd_ps(_mm256_loadu_ps(r1 + c), vx, s1);
      s2 = _mm256_fmadd_ps(_mm256_loadu_ps(r2 + c), vx, s2);
      s3 = _mm256_fmadd_ps(_mm256_loadu_ps(r3 + c), vx, s3);
    }
    float t0 = hsum(s0), t1 = hsum(s1), t2 = hsum(s2), t3 = hsum(s3);
    for (; c < cols; ++c) {
      t0 += r0[c] * x[c];
      t1 += r1[c] * x[c];
      t2 += r2[c] * x[c];
      t3 += r3[c] * x[c];
    }
    y[r] += t0;
    y[r + 1] += t1;
    y[r + 2] += t2;
    y[r + 3] += t3;
  }
  for (; r < rows; ++r) y[r] += dot_impl(a + r * cols, x, cols);
}

void gemv_t_acc(const float* a, std::size_t rows, std::size_t cols, const float* v, float* y) {
  for (std::size_t r = 0; r < rows; ++r) axpy_impl(v[r], a + r * cols, y, cols);
}

void ger_acc(float* a, std::size_t rows, std::size_t cols, const float* u, const float* v) {
  for (std::size_t r = 0; r < rows; ++r) axpy_impl(u[r], v, a + r * cols, cols);
}

float dot(const float* a, const float* b, std::size_t n) { return dot_impl(a, b, n); }

void axpy(float alpha, const float* x, float* y, std::size_t n) { axpy_impl(alpha, x, y, n); }

#else

bool supported() { return false; }
void gemv_acc(const float* a, std::size_t rows, std::size_t cols, const float* x, float* y) {
  scalar::gemv_acc(a, rows, cols, x, y);
}
void gemv_t_acc(const float* a, std::size_t rows, std::size_t cols, const float* v, float* y) {
  scalar::gemv_t_acc(a, rows, cols, v, y);
}
void ger_acc(float* a, std::size_t rows, std::size_t cols, const float* u, const float* v) {
  scalar::ger_acc(a, rows, cols, u, v);
}
float dot(const float* a, const float* b, std::size_t n) { return scalar::dot(a, b, n); }
void axpy(float alpha, const float* x, float* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }

#endif

}  // namespace rtnet::kernels::avx2
