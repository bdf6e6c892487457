#pragma once
// Dense linear-algebra kernels behind every layer.
//
// Each kernel has a scalar reference (a template, used for double precision
// and as the fallback) and, for float, an AVX2+FMA variant compiled in its own
// translation unit. The float variant is chosen once at startup from CPUID and
// can be pinned with RTNET_KERNELS=scalar|avx2 or kernels::select().
//
// All matrices are row-major; "acc" kernels add into their output.

#include <cstddef>
#include <string_view>
#include <type_traits>

namespace rtnet::kernels {

enum class Isa { scalar, avx2 };

namespace scalar {

// y += A x, A is rows x cols.
template <class T>
void gemv_acc(const T* a, std::size_t rows, std::size_t cols, const T* x, T* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = a + r * cols;
    T sum = T(0);
    for (std::size_t c = 0; c < cols; ++c) sum += row[c] * x[c];
    y[r] += sum;
  }
}

// y += A^T v, A is rows x cols, y has cols entries.
template <class T>
void gemv_t_acc(const T* a, std::size_t rows, std::size_t cols, const T* v, T* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const T vr = v[r];
    const T* row = a + r * cols;
    for (std::size_t c = 0; c < cols; ++c) y[c] += vr * row[c];
  }
}

// A += u v^T.
template <class T>
void ger_acc(T* a, std::size_t rows, std::size_t cols, const T* u, const T* v) {
  for (std::size_t r = 0; r < rows; ++r) {
    const T ur = u[r];
    T* row = a + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += ur * v[c];
  }
}

template <class T>
T dot(const T* a, const T* b, std::size_t n) {
  T sum = T(0);
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

// y += alpha x.
template <class T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace scalar

namespace avx2 {
bool supported();
void gemv_acc(const float* a, std::size_t rows, std::size_t cols, const float* x, float* y);
void gemv_t_acc(const float* a, std::size_t rows, std::size_t cols, const float* v, float* y);
void ger_acc(float* a, std::size_t rows, std::size_t cols, const float* u, const float* v);
float dot(const float* a, const float* b, std::size_t n);
void axpy(float alpha, const float* x, float* y, std::size_t n);
}  // namespace avx2

struct FloatTable {
  void (*gemv_acc)(const float*, std::size_t, std::size_t, const float*, float*);
  void (*gemv_t_acc)(const float*, std::size_t, std::size_t, const float*, float*);
  void (*ger_acc)(float*, std::size_t, std::size_t, const float*, const float*);
  float (*dot)(const float*, const float*, std::size_t);
  void (*axpy)(float, const float*, float*, std::size_t);
};

const FloatTable& float_table();
Isa active();
// Pins the float kernels; returns false (and keeps the current table) when
// the requested ISA is not available on this CPU.
bool select(Isa isa);
std::string_view name(Isa isa);

template <class T>
void gemv_acc(const T* a, std::size_t rows, std::size_t cols, const T* x, T* y) {
  if constexpr (std::is_same_v<T, float>) {
    float_table().gemv_acc(a, rows, cols, x, y);
  } else {
    scalar::gemv_acc(a, rows, cols, x, y);
  }
}

template <class T>
void gemv_t_acc(const T* a, std::size_t rows, std::size_t cols, const T* v, T* y) {
  if constexpr (std::is_same_v<T, float>) {
    float_table().gemv_t_acc(a, rows, cols, v, y);
  } else {
    scalar::gemv_t_acc(a, rows, cols, v, y);
  }
}

template <class T>
void ger_acc(T* a, std::size_t rows, std::size_t cols, const T* u, const T* v) {
  if constexpr (std::is_same_v<T, float>) {
    float_table().ger_acc(a, rows, cols, u, v);
  } else {
    scalar::ger_acc(a, rows, cols, u, v);
  }
}

template <class T>
T dot(const T* a, const T* b, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    return float_table().dot(a, b, n);
  } else {
    return scalar::dot(a, b, n);
  }
}

template <class T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    float_table().axpy(alpha, x, y, n);
  } else {
    scalar::axpy(alpha, x, y, n);
  }
}

}  // namespace rtnet::kernels
