#include <atomic>
#include <cstdlib>
#include <string>

#include "rtnet/substrate/kernels.hpp"

namespace rtnet::kernels {

namespace {

void scalar_gemv(const float* a, std::size_t r, std::size_t c, const float* x, float* y) {
  scalar::gemv_acc(a, r, c, x, y);
}
void scalar_gemv_t(const float* a, std::size_t r, std::size_t c, const float* v, float* y) {
  scalar::gemv_t_acc(a, r, c, v, y);
}
void scalar_ger(float* a, std::size_t r, std::size_t c, const float* u, const float* v) {
  scalar::ger_acc(a, r, c, u, v);
}
float scalar_dot(const float* a, const float* b, std::size_t n) { return scalar::dot(a, b, n); }
void scalar_axpy(float alpha, const float* x, float* y, std::size_t n) {
  scalar::axpy(alpha, x, y, n);
}

constexpr FloatTable kScalarTable{scalar_gemv, scalar_gemv_t, scalar_ger, scalar_dot,
                                  scalar_axpy};
constexpr FloatTable kAvx2Table{avx2::gemv_acc, avx2::gemv_t_acc, avx2::ger_acc, avx2::dot,
                                avx2::axpy};

Isa initial_isa() {
  const bool have_avx2 = avx2::supported();
  if (const char* env = std::getenv("RTNET_KERNELS")) {
    const std::string forced(env);
    if (forced == "scalar") return Isa::scalar;
    if (forced == "avx2" && have_avx2) return Isa::avx2;
  }
  return have_avx2 ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

const FloatTable& float_table() {
  return current().load(std::memory_order_relaxed) == Isa::avx2 ? kAvx2Table : kScalarTable;
}

Isa active() { return current().load(); }

bool select(Isa isa) {
  if (isa == Isa::avx2 && !avx2::supported()) return false;
  current().store(isa);
  return true;
}

std::string_view name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

}  // namespace rtnet::kernels
