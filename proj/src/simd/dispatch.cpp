#include <atomic>
#include <cstdlib>
#include <string_view>

#include "ingarch/simd/kernels.hpp"

namespace ingarch::simd {

#ifndef INGARCH_HAVE_AVX2_TU
const KernelTable* avx2_kernels() { return nullptr; }
#endif

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable* select_default() {
  if (const char* env = std::getenv("INGARCH_SIMD"); env && std::string_view(env) == "scalar")
    return &scalar_kernels();
  if (cpu_has_avx2() && avx2_kernels()) return avx2_kernels();
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> table{select_default()};
  return table;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

Isa active_isa() { return &active() == &scalar_kernels() ? Isa::Scalar : Isa::Avx2; }

void force(Isa isa) {
  if (isa == Isa::Avx2 && cpu_has_avx2() && avx2_kernels())
    slot().store(avx2_kernels(), std::memory_order_release);
  else
    slot().store(&scalar_kernels(), std::memory_order_release);
}

}  // namespace ingarch::simd
